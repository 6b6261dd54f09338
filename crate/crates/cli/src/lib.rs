//! Declarative experiment runner for `translocal-core`.
//!
//! A run is described by a small TOML file:
//!
//! ```toml
//! experiment = "vdp_averaging"
//! seed = 7
//! output = "runs/vdp"
//!
//! [params]
//! epsilon = 0.1
//! ```
//!
//! Every run writes its numeric tables as CSV, an echo of the fully
//! resolved config (`config.toml`) and a `record.json` with verdicts.
//! Re-running the echo reproduces the tables byte for byte.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
mod config;
mod experiments;
mod record;

pub use catalog::{describe, list, ExperimentInfo};
pub use config::{apply_override, ExperimentConfig};
pub use experiments::{execute, Outcome};
pub use record::{RunRecord, Table, TableInfo, Verdict};

use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("unknown experiment '{0}' (try `list`)")]
    UnknownExperiment(String),
    #[error("invalid parameters for {experiment}: {msg}")]
    Params { experiment: String, msg: String },
    #[error("{experiment} failed: {msg}")]
    Run { experiment: String, msg: String },
    #[error("io on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for anything the user can fix in the invocation, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::UnknownExperiment(_) | CliError::Params { .. } => 2,
            CliError::Run { .. } | CliError::Io { .. } => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Output directory of a run: the config's, else `runs/<experiment>`.
pub fn output_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs").join(&cfg.experiment))
}

/// Runs an experiment and writes its artifacts under `out`.
///
/// Parameters are validated before anything touches the filesystem.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<RunRecord, CliError> {
    let resolved = cfg.resolved()?;
    let started = Instant::now();
    let outcome = execute(&resolved)?;
    let wall_clock_secs = started.elapsed().as_secs_f64();

    std::fs::create_dir_all(out).map_err(io_err(out))?;
    let mut artifacts = Vec::new();
    let mut tables = Vec::new();
    let mut write = |name: &str, body: &str| -> Result<(), CliError> {
        let path = out.join(name);
        std::fs::write(&path, body).map_err(io_err(&path))?;
        artifacts.push(name.to_string());
        Ok(())
    };
    for t in &outcome.tables {
        let file = format!("{}.csv", t.name);
        write(&file, &t.to_csv())?;
        tables.push(TableInfo {
            name: t.name.clone(),
            file,
            columns: t.header.clone(),
            rows: t.rows.len(),
        });
    }
    for (name, body) in &outcome.files {
        write(name, body)?;
    }
    write("config.toml", &resolved.to_toml()?)?;
    let mut record = RunRecord {
        config: resolved,
        tables,
        wall_clock_secs,
        artifacts,
        verdicts: outcome.verdicts,
        notes: outcome.notes,
        passed: false,
    };
    record.passed = record.verdicts.iter().all(|v| v.passed);
    record.artifacts.push("record.json".into());
    let json = serde_json::to_string_pretty(&record).expect("record serializes");
    let path = out.join("record.json");
    std::fs::write(&path, json).map_err(io_err(&path))?;
    Ok(record)
}

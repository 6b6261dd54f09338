mod clique_rg;
mod commutator;
mod fluct_scaling;
mod madelung_residuals;
mod sync_sweep;
mod two_level;
mod vdp_averaging;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{CliError, ExperimentConfig, Table, Verdict};

/// What an experiment produced, before anything is written.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    /// Extra named text artifacts.
    pub files: Vec<(String, String)>,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }
}

trait Params: Default + Serialize + DeserializeOwned {
    fn validate(&self) -> Result<(), String> {
        Ok(())
    }
}

fn parse<P: Params>(name: &str, table: &toml::Table) -> Result<P, CliError> {
    let bad = |msg: String| CliError::Params {
        experiment: name.to_string(),
        msg,
    };
    let p: P = toml::Value::Table(table.clone()).try_into().map_err(|e: toml::de::Error| bad(e.to_string()))?;
    p.validate().map_err(bad)?;
    Ok(p)
}

fn echo<P: Params>(name: &str, table: &toml::Table) -> Result<toml::Table, CliError> {
    let p: P = parse(name, table)?;
    toml::Table::try_from(&p).map_err(|e| CliError::Params {
        experiment: name.to_string(),
        msg: e.to_string(),
    })
}

/// Validates `table` against the experiment's parameters and returns it
/// with defaults filled in.
pub(crate) fn resolve_params(name: &str, table: &toml::Table) -> Result<toml::Table, CliError> {
    match name {
        "clique_rg" => echo::<clique_rg::Params>(name, table),
        "sync_sweep" => echo::<sync_sweep::Params>(name, table),
        "vdp_averaging" => echo::<vdp_averaging::Params>(name, table),
        "fluct_scaling" => echo::<fluct_scaling::Params>(name, table),
        "madelung_residuals" => echo::<madelung_residuals::Params>(name, table),
        "two_level_demo" => echo::<two_level::Params>(name, table),
        "commutator_demo" => echo::<commutator::Params>(name, table),
        other => Err(CliError::UnknownExperiment(other.to_string())),
    }
}

/// Runs an experiment in memory.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let cfg = cfg.resolved()?;
    let name = cfg.experiment.as_str();
    let table = &cfg.params;
    let seed = cfg.seed;
    let result = match name {
        "clique_rg" => clique_rg::run(&parse(name, table)?, seed),
        "sync_sweep" => sync_sweep::run(&parse(name, table)?, seed),
        "vdp_averaging" => vdp_averaging::run(&parse(name, table)?),
        "fluct_scaling" => fluct_scaling::run(&parse(name, table)?, seed),
        "madelung_residuals" => madelung_residuals::run(&parse(name, table)?),
        "two_level_demo" => two_level::run(&parse(name, table)?, seed),
        "commutator_demo" => commutator::run(&parse(name, table)?),
        other => return Err(CliError::UnknownExperiment(other.to_string())),
    };
    result.map_err(|msg| CliError::Run {
        experiment: name.to_string(),
        msg,
    })
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

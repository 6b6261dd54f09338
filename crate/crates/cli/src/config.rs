use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{catalog, experiments, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub params: toml::Table,
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            seed: 0,
            output: None,
            params: toml::Table::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Canonical experiment name with every parameter spelled out.
    pub fn resolved(&self) -> Result<Self, CliError> {
        let info = catalog::lookup(&self.experiment)?;
        let params = experiments::resolve_params(info.name, &self.params)?;
        Ok(Self {
            experiment: info.name.to_string(),
            params,
            ..self.clone()
        })
    }
}

/// Applies `section.key=value` (or a bare top-level `key=value`).
///
/// The value is read as a TOML value when it parses as one and as a plain
/// string otherwise, so `--set params.radii=[4,8]` and
/// `--set params.window=sharp` both work.
pub fn apply_override(cfg: &mut ExperimentConfig, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override '{assignment}' is not key=value")))?;
    let (key, raw) = (key.trim(), raw.trim());
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let bad = |msg: &str| CliError::Config(format!("override '{assignment}': {msg}"));
    match key.split_once('.') {
        Some(("params", name)) if !name.is_empty() && !name.contains('.') => {
            cfg.params.insert(name.to_string(), value);
        }
        Some((section, _)) => return Err(bad(&format!("unknown section '{section}'"))),
        None => match key {
            "experiment" => {
                cfg.experiment = value.as_str().ok_or_else(|| bad("expected a name"))?.to_string();
            }
            "seed" => {
                let s = value.as_integer().filter(|s| *s >= 0).ok_or_else(|| bad("expected a non-negative integer"))?;
                cfg.seed = s as u64;
            }
            "output" => {
                cfg.output = Some(PathBuf::from(value.as_str().ok_or_else(|| bad("expected a path"))?));
            }
            _ => return Err(bad("unknown key")),
        },
    }
    Ok(())
}

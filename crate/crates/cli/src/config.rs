use std::path::{Path, PathBuf};

use burgers_lab::{Error, Result};
use serde::Deserialize;
use serde_json::Value;

use crate::commands::{self, Outcome};

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunCommand {
    Verify,
    CatalogVerifyAll,
    GroupSweep,
    Evolve,
}

/// A run file: one command and its arguments.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub command: RunCommand,
    #[serde(default)]
    pub families: Vec<String>,
    pub params: Option<Value>,
    pub grid: Option<String>,
    pub system: Option<String>,
    pub tolerance: Option<f64>,
    /// Where the report is written in addition to stdout.
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub elements: Option<usize>,
    pub levels: Option<u32>,
}

impl RunConfig {
    fn single_family(&self) -> Result<&str> {
        match self.families.as_slice() {
            [one] => Ok(one),
            _ => Err(Error::InvalidInput(format!("{:?} needs exactly one family", self.command))),
        }
    }
}

pub fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    let cfg: RunConfig =
        serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    if cfg.schema != commands::SCHEMA {
        return Err(Error::InvalidInput(format!("unsupported config schema {:?}", cfg.schema)));
    }
    Ok(cfg)
}

pub fn run(path: &Path) -> Result<Outcome> {
    let cfg = load(path)?;
    let params = cfg.params.as_ref().map(|p| p.to_string());
    let outcome = match cfg.command {
        RunCommand::Verify => commands::verify(
            cfg.single_family()?,
            params.as_deref(),
            cfg.grid.as_deref(),
            cfg.system.as_deref().unwrap_or("burgers"),
            cfg.tolerance,
        )?,
        RunCommand::CatalogVerifyAll => commands::catalog_verify_all(&cfg.families, cfg.tolerance)?,
        RunCommand::GroupSweep => {
            commands::group_sweep(cfg.seed.unwrap_or(42), cfg.elements.unwrap_or(20), &cfg.families, &[], false)?
        }
        RunCommand::Evolve => {
            commands::evolve(cfg.single_family()?, params.as_deref(), None, cfg.levels.unwrap_or(3), 17, None, None)?
        }
    };
    if let (Some(out), commands::Body::Json(v)) = (&cfg.output, &outcome.body) {
        let text = serde_json::to_string_pretty(v).expect("serializable report");
        std::fs::write(out, text).map_err(|e| Error::InvalidInput(format!("{}: {e}", out.display())))?;
    }
    Ok(outcome)
}

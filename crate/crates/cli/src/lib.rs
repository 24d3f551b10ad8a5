//! Config-driven runner for the laboratory's experiments: parse and validate
//! a JSON config, compute, and write a report, CSV tables and a manifest.

pub mod config;
pub mod describe;
pub mod execute;
pub mod output;

use std::path::Path;

use thiserror::Error;

pub use config::{Experiment, ExperimentConfig};
pub use execute::{execute, Outcome};
pub use output::{canonical_report, config_hash, write_outputs, RunManifest};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LabError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("unknown experiment {0:?}")]
    UnknownExperiment(String),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl LabError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Self::ConfigInvalid(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::ConfigInvalid(_) | Self::UnknownExperiment(_) => 2,
            Self::Compute(_) | Self::Io(_) => 3,
        }
    }
}

/// Exit status when every check passed.
pub const EXIT_PASS: i32 = 0;
/// Exit status when a check failed; reports are still written.
pub const EXIT_ASSERTION: i32 = 1;

pub fn load_config(path: &Path) -> Result<ExperimentConfig, LabError> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::invalid(format!("{}: {e}", path.display())))?;
    ExperimentConfig::parse(&text)
}

/// Runs a parsed config and writes its outputs into `dir`.
pub fn run(config: &ExperimentConfig, dir: &Path) -> Result<(Outcome, RunManifest), LabError> {
    let started = chrono::Utc::now();
    let outcome = execute(&config.experiment)?;
    let manifest = write_outputs(dir, config, &outcome, started)?;
    Ok((outcome, manifest))
}

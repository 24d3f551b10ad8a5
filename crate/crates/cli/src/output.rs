//! Report, CSV and manifest files for one run.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use onesided_core::compactness::{Check, Table};

use crate::config::ExperimentConfig;
use crate::execute::Outcome;
use crate::LabError;

pub const REPORT_FILE: &str = "report.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    /// SHA-256 of the canonical config, hex encoded.
    pub config_hash: String,
    pub tool_version: String,
    pub started: String,
    pub finished: String,
    pub files: Vec<String>,
    pub pass: bool,
    pub checks: Vec<CheckSummary>,
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(config.canonical_bytes()))
}

/// The deterministic part of a run: everything except timestamps.
pub fn canonical_report(config: &ExperimentConfig, outcome: &Outcome) -> Value {
    json!({
        "experiment": config.experiment.name(),
        "config_hash": config_hash(config),
        "config": config.canonical(),
        "result": outcome.result,
        "checks": outcome.checks,
        "pass": outcome.passed(),
    })
}

fn io(path: &Path, e: impl std::fmt::Display) -> LabError {
    LabError::Io(format!("{}: {e}", path.display()))
}

fn write_table(dir: &Path, table: &Table) -> Result<String, LabError> {
    let name = format!("{}.csv", table.name);
    let path = dir.join(&name);
    let mut w = csv::Writer::from_path(&path).map_err(|e| io(&path, e))?;
    w.write_record(&table.columns).map_err(|e| io(&path, e))?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(|e| io(&path, e))?;
    }
    w.flush().map_err(|e| io(&path, e))?;
    Ok(name)
}

fn stamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Writes `report.json`, one CSV per table and `manifest.json` into `dir`.
pub fn write_outputs(
    dir: &Path,
    config: &ExperimentConfig,
    outcome: &Outcome,
    started: DateTime<Utc>,
) -> Result<RunManifest, LabError> {
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let report = canonical_report(config, outcome);
    let report_path = dir.join(REPORT_FILE);
    let mut text = serde_json::to_string_pretty(&report).expect("reports serialize");
    text.push('\n');
    fs::write(&report_path, text).map_err(|e| io(&report_path, e))?;
    let mut files = vec![REPORT_FILE.to_string()];
    for t in &outcome.tables {
        files.push(write_table(dir, t)?);
    }
    files.push(MANIFEST_FILE.to_string());
    let manifest = RunManifest {
        experiment: config.experiment.name().to_string(),
        config_hash: config_hash(config),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started: stamp(started),
        finished: stamp(Utc::now()),
        files,
        pass: outcome.passed(),
        checks: outcome
            .checks
            .iter()
            .map(|c: &Check| CheckSummary {
                name: c.name.clone(),
                pass: c.pass,
            })
            .collect(),
    };
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifests serialize");
    fs::write(&manifest_path, text + "\n").map_err(|e| io(&manifest_path, e))?;
    Ok(manifest)
}

/// Output directory: `--out`, else the config's `output_dir`, else
/// `lab-out/<experiment>`.
pub fn output_dir(cli: Option<&Path>, config: &ExperimentConfig) -> PathBuf {
    match (cli, &config.output_dir) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(d)) => PathBuf::from(d),
        (None, None) => Path::new("lab-out").join(config.experiment.name()),
    }
}

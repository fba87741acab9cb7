use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use expdamp_core::diagnostics::{write_ledger_csv, EnergyLedgerRow};
use expdamp_core::dynamics::SimConfig;
use serde::Serialize;

use crate::error::CliError;

/// Output directory that remembers every file written into it.
pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
    started: Instant,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn note(&mut self, name: &str) {
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.note(name);
        Ok(())
    }

    pub fn ledger(&mut self, name: &str, rows: &[EnergyLedgerRow]) -> Result<(), CliError> {
        let path = self.path(name);
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        write_ledger_csv(std::io::BufWriter::new(file), rows).map_err(|e| match e {
            expdamp_core::CoreError::Io(io) => CliError::io(&path, io),
            other => CliError::Numerical(other.to_string()),
        })?;
        self.note(name);
        Ok(())
    }

    /// Registers a file written by other means.
    pub fn record(&mut self, name: &str) {
        self.note(name);
    }

    pub fn manifest(mut self, verb: &str, config: Option<&SimConfig>, seed: Option<u64>, exit_code: u8) -> Result<(), CliError> {
        let manifest = RunManifest {
            verb: verb.to_string(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config: config.cloned(),
            outputs: self.written.clone(),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            exit_code,
        };
        self.json("manifest.json", &manifest)
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub verb: String,
    pub artifact_version: String,
    pub seed: Option<u64>,
    pub config: Option<SimConfig>,
    /// Files in the output directory, relative to it; the manifest itself is
    /// not listed.
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
    pub exit_code: u8,
}

/// One named check in a summary.
#[derive(Debug, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub status: Status,
    pub report: serde_json::Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl CheckEntry {
    pub fn new(name: impl Into<String>, pass: bool, report: &impl Serialize) -> Self {
        Self {
            name: name.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            report: serde_json::to_value(report).expect("report serializes"),
        }
    }

    pub fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: Status::Skipped,
            report: serde_json::json!({ "reason": reason.into() }),
        }
    }

    pub fn failed(name: impl Into<String>, error: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: Status::Fail,
            report: serde_json::json!({ "error": error.into() }),
        }
    }
}

pub fn all_pass(checks: &[CheckEntry]) -> bool {
    checks.iter().all(|c| c.status != Status::Fail)
}

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use snnfit_core::objectives::StudySpec;

use crate::config::ExperimentConfig;
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

/// One GA run: a study under one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub id: String,
    pub family: String,
    pub seed: u64,
    pub ga_seed: u64,
    pub spec: StudySpec,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Population files, one per generation, relative to the run directory.
    #[serde(default)]
    pub populations: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub front_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub front_json: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotEntry {
    pub file: String,
    /// Population files the plot was drawn from.
    pub sources: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub name: String,
    pub config_digest: String,
    pub effective_config: ExperimentConfig,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub complete: bool,
    #[serde(default)]
    pub runs: Vec<RunEntry>,
    #[serde(default)]
    pub plots: Vec<PlotEntry>,
    /// Every other output file, relative to the run directory.
    #[serde(default)]
    pub files: Vec<String>,
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl Manifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            name: config.name.clone(),
            config_digest: config.digest(),
            effective_config: config.clone(),
            started_unix: unix_now(),
            finished_unix: 0,
            complete: false,
            runs: Vec::new(),
            plots: Vec::new(),
            files: Vec::new(),
        }
    }

    /// All files the manifest points at.
    pub fn listed_files(&self) -> Vec<String> {
        let mut out = self.files.clone();
        for r in &self.runs {
            out.extend(r.populations.iter().cloned());
            out.extend(
                [&r.front_csv, &r.front_json, &r.summary, &r.log]
                    .into_iter()
                    .flatten()
                    .cloned(),
            );
        }
        out.extend(self.plots.iter().map(|p| p.file.clone()));
        out
    }

    pub fn write(&mut self, dir: &Path) -> Result<(), CliError> {
        self.finished_unix = unix_now();
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    pub fn read(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: corrupt manifest: {e}", path.display())))
    }
}

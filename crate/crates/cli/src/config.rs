//! Experiment files: TOML with a versioned schema, validated up front and
//! digested after command-line overrides are merged in.

use std::path::Path;

use moo_core::{GaConfig, GeneSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use snnfit_core::network::NetworkGenome;
use snnfit_core::objectives::{EvalSettings, StudyFamily};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// GA settings shared by every study of an experiment. Genes come from the
/// studies themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaSection {
    #[serde(default = "default_population")]
    pub population_size: usize,
    #[serde(default = "default_generations")]
    pub generations: usize,
    #[serde(default = "default_eta_c")]
    pub eta_c: f64,
    #[serde(default = "default_p_c")]
    pub p_c: f64,
    #[serde(default = "default_eta_m")]
    pub eta_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partitions: Option<usize>,
    #[serde(default)]
    pub reevaluate_survivors: bool,
}

fn default_population() -> usize {
    25
}
fn default_generations() -> usize {
    50
}
fn default_eta_c() -> f64 {
    30.0
}
fn default_p_c() -> f64 {
    1.0
}
fn default_eta_m() -> f64 {
    20.0
}

impl Default for GaSection {
    fn default() -> Self {
        Self {
            population_size: default_population(),
            generations: default_generations(),
            eta_c: default_eta_c(),
            p_c: default_p_c(),
            eta_m: default_eta_m(),
            p_m: None,
            partitions: None,
            reevaluate_survivors: false,
        }
    }
}

impl GaSection {
    pub fn to_config(&self, genes: Vec<GeneSpec>) -> GaConfig {
        GaConfig {
            population_size: self.population_size,
            generations: self.generations,
            genes,
            eta_c: self.eta_c,
            p_c: self.p_c,
            eta_m: self.eta_m,
            p_m: self.p_m,
            partitions: self.partitions,
            reevaluate_survivors: self.reevaluate_survivors,
            parallel: true,
        }
    }
}

/// Explicit genome for `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    #[serde(default = "default_g_e")]
    pub g_e: f64,
    #[serde(default = "default_g_i")]
    pub g_i: f64,
    #[serde(default = "default_f")]
    pub f: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_inh: Option<f64>,
    /// Bin width of the rate series, in ms.
    #[serde(default = "default_bin")]
    pub bin: usize,
    #[serde(default = "default_true")]
    pub noise: bool,
    #[serde(default)]
    pub svg: bool,
    #[serde(default)]
    pub dump_weights: bool,
    /// Neurons whose membrane potential is written out (at most 10).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<usize>,
}

fn default_g_e() -> f64 {
    NetworkGenome::BASELINE.g_e
}
fn default_g_i() -> f64 {
    NetworkGenome::BASELINE.g_i
}
fn default_f() -> f64 {
    1.0
}
fn default_bin() -> usize {
    1
}
fn default_true() -> bool {
    true
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            g_e: default_g_e(),
            g_i: default_g_i(),
            f: default_f(),
            mu: 0.0,
            mu_inh: None,
            bin: default_bin(),
            noise: true,
            svg: false,
            dump_weights: false,
            probes: Vec::new(),
        }
    }
}

impl SimulateSection {
    pub fn genome(&self) -> NetworkGenome {
        NetworkGenome {
            g_e: self.g_e,
            g_i: self.g_i,
            f: self.f,
            mu_thal: self.mu,
            mu_thal_inh: self.mu_inh,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub name: String,
    /// One full set of runs per seed.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub ga: GaSection,
    #[serde(default)]
    pub network: EvalSettings,
    #[serde(default, rename = "study", skip_serializing_if = "Vec::is_empty")]
    pub studies: Vec<StudyFamily>,
    #[serde(default)]
    pub simulate: SimulateSection,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

impl ExperimentConfig {
    /// Defaults for a config-less `simulate`.
    pub fn simulate_default() -> Self {
        Self {
            schema: SCHEMA_VERSION,
            name: "simulate".into(),
            seeds: default_seeds(),
            ga: GaSection::default(),
            network: EvalSettings::default(),
            studies: Vec::new(),
            simulate: SimulateSection::default(),
        }
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(format!("{}: {e}", origin.display())))?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let err = |m: String| Err(CliError::Config(m));
        if self.schema != SCHEMA_VERSION {
            return err(format!("schema = {} is not supported (expected {SCHEMA_VERSION})", self.schema));
        }
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return err(format!("name {:?} must be non-empty and use only [A-Za-z0-9_-]", self.name));
        }
        if self.seeds.is_empty() {
            return err("seeds must list at least one seed".into());
        }
        self.network.validate().map_err(|e| CliError::Config(format!("network: {e}")))?;
        for family in &self.studies {
            let specs = snnfit_core::objectives::experiment_grid(family, 0)
                .map_err(|e| CliError::Config(format!("study {}: {e}", family.name)))?;
            for spec in specs {
                self.ga
                    .to_config(spec.genes.clone())
                    .validate()
                    .map_err(|e| CliError::Config(format!("ga ({}): {e}", spec.id)))?;
            }
        }
        let names: Vec<&str> = self.studies.iter().map(|s| s.name.as_str()).collect();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return err(format!("study name {n:?} used twice"));
            }
        }
        let sim = &self.simulate;
        sim.genome()
            .validate()
            .map_err(|e| CliError::Config(format!("simulate: {e}")))?;
        if sim.bin == 0 {
            return err("simulate.bin must be at least 1".into());
        }
        if sim.probes.len() > snnfit_core::simulator::MAX_PROBES {
            return err(format!("simulate.probes: at most {} neurons", snnfit_core::simulator::MAX_PROBES));
        }
        Ok(())
    }

    /// Canonical JSON of the effective config.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

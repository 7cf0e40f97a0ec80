//! Fitness evaluation: genes in, distances between simulated and target
//! population rates out.

use std::error::Error;

use moo_core::{EvalTag, GeneSpec, Problem};
use serde::{Deserialize, Serialize};

use crate::error::SnnError;
use crate::network::{build_network, NetworkGenome, DEFAULT_N_EXC, DEFAULT_N_INH};
use crate::seed::{evaluation_seed, mix_seed, noise_seed_for};
use crate::simulator::{mean_rates, run_simulation_with, RateSummary, SimOptions, DEFAULT_DURATION};

pub const GENE_G_E: &str = "g_e";
pub const GENE_G_I: &str = "g_i";
pub const GENE_F: &str = "f";
pub const GENE_MU: &str = "mu";
pub const GENE_MU_INH: &str = "mu_inh";

const KNOWN_GENES: [&str; 5] = [GENE_G_E, GENE_G_I, GENE_F, GENE_MU, GENE_MU_INH];

/// Objective value reported for both rate errors when a simulation diverges.
pub const DEFAULT_DIVERGENCE_SENTINEL: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateTargets {
    /// Excitatory target in Hz.
    pub exc: f64,
    /// Inhibitory target in Hz.
    pub inh: f64,
}

impl RateTargets {
    pub fn new(exc: f64, inh: f64) -> Self {
        Self { exc, inh }
    }

    pub fn validate(&self) -> Result<(), SnnError> {
        if self.exc >= 0.0 && self.inh >= 0.0 && self.exc.is_finite() && self.inh.is_finite() {
            Ok(())
        } else {
            Err(SnnError::Config(format!("rate targets must be finite and >= 0, got {self:?}")))
        }
    }

    /// `(|r_exc - exc|, |r_inh - inh|)`.
    pub fn distances(&self, rates: &RateSummary) -> (f64, f64) {
        ((rates.r_exc - self.exc).abs(), (rates.r_inh - self.inh).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyMode {
    /// Optimize the weight scales at a fixed connectivity fraction.
    TwoObjective,
    /// Optimize drive, weight scales and connectivity, with the
    /// connectivity fraction as a third minimized objective.
    ThreeObjective,
}

impl StudyMode {
    pub fn n_objectives(self) -> usize {
        match self {
            StudyMode::TwoObjective => 2,
            StudyMode::ThreeObjective => 3,
        }
    }

    pub fn objective_names(self) -> Vec<String> {
        let mut names = vec!["d_exc".to_string(), "d_inh".to_string()];
        if self == StudyMode::ThreeObjective {
            names.push("f".to_string());
        }
        names
    }
}

/// Default search ranges.
pub fn default_gene(name: &str) -> Option<GeneSpec> {
    let (lo, hi) = match name {
        GENE_G_E => (0.0, 1.0),
        GENE_G_I => (0.0, 2.0),
        GENE_F => (0.0, 1.0),
        GENE_MU | GENE_MU_INH => (-10.0, 10.0),
        _ => return None,
    };
    GeneSpec::new(name, lo, hi).ok()
}

/// `[g_e, g_i]` or `[mu, (mu_inh,) g_e, g_i, f]` with default ranges.
pub fn default_genes(mode: StudyMode, separate_inh_mu: bool) -> Vec<GeneSpec> {
    let names: Vec<&str> = match mode {
        StudyMode::TwoObjective => vec![GENE_G_E, GENE_G_I],
        StudyMode::ThreeObjective if separate_inh_mu => vec![GENE_MU, GENE_MU_INH, GENE_G_E, GENE_G_I, GENE_F],
        StudyMode::ThreeObjective => vec![GENE_MU, GENE_G_E, GENE_G_I, GENE_F],
    };
    names.into_iter().filter_map(default_gene).collect()
}

/// One optimization problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    pub id: String,
    pub mode: StudyMode,
    pub targets: RateTargets,
    /// Connectivity fraction, used in two-objective mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_f: Option<f64>,
    /// Thalamic offset used when `mu` is not a gene.
    #[serde(default)]
    pub mu_thal: f64,
    pub genes: Vec<GeneSpec>,
    /// Seed from which all per-evaluation seeds of this study derive.
    pub seed: u64,
}

impl StudySpec {
    pub fn validate(&self) -> Result<(), SnnError> {
        self.targets.validate()?;
        let mut seen = Vec::new();
        for g in &self.genes {
            g.validate().map_err(|e| SnnError::Config(e.to_string()))?;
            if !KNOWN_GENES.contains(&g.name.as_str()) {
                return Err(SnnError::Config(format!(
                    "{}: unknown gene {:?}, expected one of {KNOWN_GENES:?}",
                    self.id, g.name
                )));
            }
            if seen.contains(&g.name.as_str()) {
                return Err(SnnError::Config(format!("{}: duplicate gene {:?}", self.id, g.name)));
            }
            seen.push(g.name.as_str());
        }
        let has = |n: &str| seen.contains(&n);
        if !has(GENE_G_E) || !has(GENE_G_I) {
            return Err(SnnError::Config(format!("{}: genes g_e and g_i are required", self.id)));
        }
        if has(GENE_MU_INH) && !has(GENE_MU) {
            return Err(SnnError::Config(format!("{}: mu_inh requires mu", self.id)));
        }
        match self.mode {
            StudyMode::TwoObjective => {
                if has(GENE_F) {
                    return Err(SnnError::Config(format!(
                        "{}: f is fixed in two-objective mode, not a gene",
                        self.id
                    )));
                }
                match self.fixed_f {
                    Some(f) if (0.0..=1.0).contains(&f) => {}
                    other => {
                        return Err(SnnError::Config(format!(
                            "{}: two-objective mode needs fixed_f in [0, 1], got {other:?}",
                            self.id
                        )))
                    }
                }
            }
            StudyMode::ThreeObjective => {
                if !has(GENE_F) {
                    return Err(SnnError::Config(format!("{}: three-objective mode needs gene f", self.id)));
                }
                if self.fixed_f.is_some() {
                    return Err(SnnError::Config(format!(
                        "{}: fixed_f has no meaning in three-objective mode",
                        self.id
                    )));
                }
            }
        }
        if !self.mu_thal.is_finite() {
            return Err(SnnError::Config(format!("{}: mu_thal must be finite", self.id)));
        }
        Ok(())
    }

    pub fn gene_names(&self) -> Vec<String> {
        self.genes.iter().map(|g| g.name.clone()).collect()
    }

    /// Network genome for a gene vector laid out as `self.genes`.
    pub fn genome(&self, genes: &[f64]) -> Result<NetworkGenome, SnnError> {
        if genes.len() != self.genes.len() {
            return Err(SnnError::Domain(format!(
                "expected {} genes, got {}",
                self.genes.len(),
                genes.len()
            )));
        }
        let mut genome = NetworkGenome {
            g_e: 0.0,
            g_i: 0.0,
            f: self.fixed_f.unwrap_or(1.0),
            mu_thal: self.mu_thal,
            mu_thal_inh: None,
        };
        for (spec, &x) in self.genes.iter().zip(genes) {
            match spec.name.as_str() {
                GENE_G_E => genome.g_e = x,
                GENE_G_I => genome.g_i = x,
                GENE_F => genome.f = x,
                GENE_MU => genome.mu_thal = x,
                GENE_MU_INH => genome.mu_thal_inh = Some(x),
                other => return Err(SnnError::Config(format!("unknown gene {other:?}"))),
            }
        }
        Ok(genome)
    }
}

/// Simulation settings shared by every evaluation of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSettings {
    #[serde(default = "default_n_exc")]
    pub n_exc: usize,
    #[serde(default = "default_n_inh")]
    pub n_inh: usize,
    /// Simulated ticks (ms) per evaluation.
    #[serde(default = "default_duration")]
    pub duration: usize,
    /// Independent simulations per evaluation; objectives are the mean
    /// distances.
    #[serde(default = "default_repeats")]
    pub n_repeats: usize,
    #[serde(default = "default_sentinel")]
    pub divergence_sentinel: f64,
}

fn default_n_exc() -> usize {
    DEFAULT_N_EXC
}
fn default_n_inh() -> usize {
    DEFAULT_N_INH
}
fn default_duration() -> usize {
    DEFAULT_DURATION
}
fn default_repeats() -> usize {
    1
}
fn default_sentinel() -> f64 {
    DEFAULT_DIVERGENCE_SENTINEL
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            n_exc: DEFAULT_N_EXC,
            n_inh: DEFAULT_N_INH,
            duration: DEFAULT_DURATION,
            n_repeats: 1,
            divergence_sentinel: DEFAULT_DIVERGENCE_SENTINEL,
        }
    }
}

impl EvalSettings {
    pub fn validate(&self) -> Result<(), SnnError> {
        if self.n_exc + self.n_inh == 0 {
            return Err(SnnError::Config("network needs at least one neuron".into()));
        }
        if self.duration == 0 {
            return Err(SnnError::Config("duration must be at least 1 ms".into()));
        }
        if self.n_repeats == 0 {
            return Err(SnnError::Config("n_repeats must be at least 1".into()));
        }
        if !(self.divergence_sentinel.is_finite() && self.divergence_sentinel >= 0.0) {
            return Err(SnnError::Config("divergence_sentinel must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Network and noise seeds of repeat `repeat` of the evaluation `tag`.
pub fn repeat_seeds(study_seed: u64, tag: EvalTag, repeat: usize) -> (u64, u64) {
    let base = evaluation_seed(study_seed, tag.generation, tag.index);
    let net = if repeat == 0 {
        base
    } else {
        mix_seed(&[base, repeat as u64])
    };
    (net, noise_seed_for(net))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub objectives: Vec<f64>,
    /// Rates of each repeat that completed.
    pub rates: Vec<RateSummary>,
    pub diverged: bool,
}

fn evaluate(
    genes: &[f64],
    spec: &StudySpec,
    settings: &EvalSettings,
    tag: EvalTag,
) -> Result<Evaluation, SnnError> {
    let genome = spec.genome(genes)?;
    let mut rates = Vec::with_capacity(settings.n_repeats);
    let (mut d_exc, mut d_inh) = (0.0, 0.0);
    let mut diverged = false;
    for repeat in 0..settings.n_repeats {
        let (net_seed, noise_seed) = repeat_seeds(spec.seed, tag, repeat);
        let net = build_network(&genome, net_seed, settings.n_exc, settings.n_inh)?;
        match run_simulation_with(&net, &genome, settings.duration, noise_seed, &SimOptions::default()) {
            Ok(out) => {
                let r = mean_rates(&out.record);
                let (de, di) = spec.targets.distances(&r);
                d_exc += de;
                d_inh += di;
                rates.push(r);
            }
            Err(e @ SnnError::Diverged { .. }) => {
                log::warn!(
                    "{}: generation {} individual {} genes {genes:?} diverged: {e}",
                    spec.id,
                    tag.generation,
                    tag.index
                );
                diverged = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let mut objectives = if diverged {
        vec![settings.divergence_sentinel; 2]
    } else {
        let k = settings.n_repeats as f64;
        vec![d_exc / k, d_inh / k]
    };
    if spec.mode == StudyMode::ThreeObjective {
        objectives.push(genome.f);
    }
    Ok(Evaluation {
        objectives,
        rates,
        diverged,
    })
}

/// `(|r_exc - target_exc|, |r_inh - target_inh|)` for weight-scale genes at
/// the study's fixed connectivity.
pub fn evaluate_two_objective(
    genes: &[f64],
    spec: &StudySpec,
    settings: &EvalSettings,
    tag: EvalTag,
) -> Result<Evaluation, SnnError> {
    if spec.mode != StudyMode::TwoObjective {
        return Err(SnnError::Config(format!("{} is not a two-objective study", spec.id)));
    }
    evaluate(genes, spec, settings, tag)
}

/// Rate distances plus the connectivity fraction itself.
pub fn evaluate_three_objective(
    genes: &[f64],
    spec: &StudySpec,
    settings: &EvalSettings,
    tag: EvalTag,
) -> Result<Evaluation, SnnError> {
    if spec.mode != StudyMode::ThreeObjective {
        return Err(SnnError::Config(format!("{} is not a three-objective study", spec.id)));
    }
    evaluate(genes, spec, settings, tag)
}

/// A study bound to its simulation settings, usable as a GA problem.
#[derive(Debug, Clone)]
pub struct SnnProblem {
    pub spec: StudySpec,
    pub settings: EvalSettings,
}

impl SnnProblem {
    pub fn new(spec: StudySpec, settings: EvalSettings) -> Result<Self, SnnError> {
        spec.validate()?;
        settings.validate()?;
        Ok(Self { spec, settings })
    }

    pub fn evaluate_full(&self, genes: &[f64], tag: EvalTag) -> Result<Evaluation, SnnError> {
        match self.spec.mode {
            StudyMode::TwoObjective => evaluate_two_objective(genes, &self.spec, &self.settings, tag),
            StudyMode::ThreeObjective => evaluate_three_objective(genes, &self.spec, &self.settings, tag),
        }
    }
}

impl Problem for SnnProblem {
    fn n_objectives(&self) -> usize {
        self.spec.mode.n_objectives()
    }

    fn evaluate(&self, genes: &[f64], tag: EvalTag) -> Result<Vec<f64>, Box<dyn Error + Send + Sync>> {
        self.evaluate_full(genes, tag).map(|e| e.objectives).map_err(Into::into)
    }
}

/// Factor lists expanded into one study per combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyFamily {
    pub name: String,
    pub mode: StudyMode,
    /// Connectivity fractions (two-objective mode only).
    #[serde(default)]
    pub f_values: Vec<f64>,
    pub targets: Vec<RateTargets>,
    /// Gene ranges; defaults per mode when empty.
    #[serde(default)]
    pub genes: Vec<GeneSpec>,
    #[serde(default)]
    pub mu_thal: f64,
    /// Separate inhibitory drive gene in three-objective mode.
    #[serde(default)]
    pub separate_inh_mu: bool,
}

impl StudyFamily {
    /// Weight-scale search at f = 1, 0.5, 0.2 toward 5 Hz / 2 Hz.
    pub fn fig3() -> Self {
        Self {
            name: "fig3".into(),
            mode: StudyMode::TwoObjective,
            f_values: vec![1.0, 0.5, 0.2],
            targets: vec![RateTargets::new(5.0, 2.0)],
            genes: Vec::new(),
            mu_thal: 0.0,
            separate_inh_mu: false,
        }
    }

    /// The nine connectivity/target combinations.
    pub fn fig4() -> Self {
        Self {
            name: "fig4".into(),
            targets: vec![
                RateTargets::new(5.0, 2.0),
                RateTargets::new(2.0, 2.0),
                RateTargets::new(2.0, 5.0),
            ],
            ..Self::fig3()
        }
    }

    /// Three-objective sparsity study.
    pub fn fig5() -> Self {
        Self {
            name: "fig5".into(),
            mode: StudyMode::ThreeObjective,
            f_values: Vec::new(),
            targets: vec![
                RateTargets::new(2.0, 10.0),
                RateTargets::new(5.0, 5.0),
                RateTargets::new(10.0, 2.0),
            ],
            genes: Vec::new(),
            mu_thal: 0.0,
            separate_inh_mu: false,
        }
    }
}

fn fmt_factor(x: f64) -> String {
    format!("{x}").replace('-', "m")
}

/// Cross product of the family's factor lists. Each study gets a seed
/// derived from `global_seed` and its position in the grid.
pub fn experiment_grid(family: &StudyFamily, global_seed: u64) -> Result<Vec<StudySpec>, SnnError> {
    if family.targets.is_empty() {
        return Err(SnnError::Config(format!("{}: empty target list", family.name)));
    }
    let genes = if family.genes.is_empty() {
        default_genes(family.mode, family.separate_inh_mu)
    } else {
        family.genes.clone()
    };
    let f_values: Vec<Option<f64>> = match family.mode {
        StudyMode::TwoObjective => {
            if family.f_values.is_empty() {
                return Err(SnnError::Config(format!("{}: empty f_values list", family.name)));
            }
            family.f_values.iter().copied().map(Some).collect()
        }
        StudyMode::ThreeObjective => {
            if !family.f_values.is_empty() {
                return Err(SnnError::Config(format!(
                    "{}: f_values are not used in three-objective mode",
                    family.name
                )));
            }
            vec![None]
        }
    };

    let mut specs = Vec::new();
    for f in &f_values {
        for t in &family.targets {
            let index = specs.len() as u64;
            let mut id = family.name.clone();
            if let Some(f) = f {
                id.push_str(&format!("-f{}", fmt_factor(*f)));
            }
            id.push_str(&format!("-t{}_{}", fmt_factor(t.exc), fmt_factor(t.inh)));
            let spec = StudySpec {
                id,
                mode: family.mode,
                targets: *t,
                fixed_f: *f,
                mu_thal: family.mu_thal,
                genes: genes.clone(),
                seed: mix_seed(&[global_seed, index]),
            };
            spec.validate()?;
            specs.push(spec);
        }
    }
    Ok(specs)
}

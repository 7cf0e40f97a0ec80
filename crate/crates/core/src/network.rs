//! Realized network instances: heterogeneous neurons, a sign-segregated
//! weight matrix with a Bernoulli sparsity mask, and thalamic drive.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::SnnError;
use crate::neuron::{sample_heterogeneous_params, NeuronParams, Population};
use crate::seed::{evaluation_seed, stream, STREAM_MASK, STREAM_PARAMS, STREAM_WEIGHTS};

pub const DEFAULT_N_EXC: usize = 800;
pub const DEFAULT_N_INH: usize = 200;

/// Standard deviation of the thalamic noise for excitatory neurons.
pub const THALAMIC_SD_EXC: f64 = 5.0;
/// Standard deviation of the thalamic noise for inhibitory neurons.
pub const THALAMIC_SD_INH: f64 = 2.0;

/// Connectivity parameters optimized by the GA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkGenome {
    /// Upper end of the excitatory weight range.
    pub g_e: f64,
    /// Magnitude of the inhibitory weight range.
    pub g_i: f64,
    /// Probability that a directed connection exists.
    pub f: f64,
    /// Mean thalamic current offset (shared by both populations unless
    /// `mu_thal_inh` is set).
    pub mu_thal: f64,
    /// Separate inhibitory thalamic mean.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_thal_inh: Option<f64>,
}

impl NetworkGenome {
    /// Weight scales of the original cortical model, all-to-all, no offset.
    pub const BASELINE: NetworkGenome = NetworkGenome {
        g_e: 0.5,
        g_i: 1.0,
        f: 1.0,
        mu_thal: 0.0,
        mu_thal_inh: None,
    };

    pub fn new(g_e: f64, g_i: f64, f: f64, mu_thal: f64) -> Self {
        Self {
            g_e,
            g_i,
            f,
            mu_thal,
            mu_thal_inh: None,
        }
    }

    pub fn validate(&self) -> Result<(), SnnError> {
        let finite = [self.g_e, self.g_i, self.f, self.mu_thal]
            .iter()
            .chain(self.mu_thal_inh.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(SnnError::Domain(format!("non-finite genome {self:?}")));
        }
        if self.g_e < 0.0 || self.g_i < 0.0 {
            return Err(SnnError::Domain(format!(
                "weight scales must be non-negative (g_e = {}, g_i = {})",
                self.g_e, self.g_i
            )));
        }
        if !(0.0..=1.0).contains(&self.f) {
            return Err(SnnError::Domain(format!("connectivity fraction {} outside [0, 1]", self.f)));
        }
        Ok(())
    }

    pub fn thalamic_mean(&self, population: Population) -> f64 {
        match population {
            Population::Excitatory => self.mu_thal,
            Population::Inhibitory => self.mu_thal_inh.unwrap_or(self.mu_thal),
        }
    }
}

/// Dense `n x n` weight matrix; entry `(post, pre)` is the current pulse
/// neuron `post` receives when `pre` fires. Stored column by column so the
/// pulses of one presynaptic neuron are contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    columns: Vec<f64>,
}

impl WeightMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            columns: vec![0.0; n * n],
        }
    }

    /// Builds from row-major `[post][pre]` data.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (post, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "weight matrix must be square");
            for (pre, &w) in row.iter().enumerate() {
                m.set(post, pre, w);
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, post: usize, pre: usize) -> f64 {
        self.columns[pre * self.n + post]
    }

    pub fn set(&mut self, post: usize, pre: usize, w: f64) {
        self.columns[pre * self.n + post] = w;
    }

    /// Pulses delivered by presynaptic neuron `pre`, indexed by target.
    #[inline]
    pub fn column(&self, pre: usize) -> &[f64] {
        &self.columns[pre * self.n..(pre + 1) * self.n]
    }

    pub fn nonzero_count(&self) -> usize {
        self.columns.iter().filter(|&&w| w != 0.0).count()
    }

    /// `(post, pre, weight)` for every non-zero entry, row-major order.
    pub fn nonzeros(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for post in 0..self.n {
            for pre in 0..self.n {
                let w = self.get(post, pre);
                if w != 0.0 {
                    out.push((post, pre, w));
                }
            }
        }
        out
    }
}

/// A fully realized network, immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInstance {
    pub n_exc: usize,
    pub n_inh: usize,
    pub params: Vec<NeuronParams>,
    pub weights: WeightMatrix,
    pub seed: u64,
}

impl NetworkInstance {
    pub fn len(&self) -> usize {
        self.n_exc + self.n_inh
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn population(&self, index: usize) -> Population {
        if index < self.n_exc {
            Population::Excitatory
        } else {
            Population::Inhibitory
        }
    }

    /// Writes `row,col,weight` for every non-zero weight.
    pub fn dump_weights_csv(&self, path: &Path) -> Result<(), SnnError> {
        let file = File::create(path).map_err(|e| SnnError::io(path, e))?;
        let mut out = BufWriter::new(file);
        let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
            writeln!(out, "row,col,weight")?;
            for (post, pre, w) in self.weights.nonzeros() {
                writeln!(out, "{post},{pre},{w}")?;
            }
            out.flush()
        };
        write(&mut out).map_err(|e| SnnError::io(path, e))
    }
}

/// Builds a network from `genome`, fully determined by `seed`.
///
/// Each directed connection `pre -> post` exists independently with
/// probability `f`; excitatory weights are uniform in `[0, g_e]` and
/// inhibitory ones in `[-g_i, 0]`. Neuron coefficients, the mask and the
/// weight magnitudes come from separate streams of `seed`, so changing `f`
/// or the weight scales leaves the other draws untouched.
pub fn build_network(
    genome: &NetworkGenome,
    seed: u64,
    n_exc: usize,
    n_inh: usize,
) -> Result<NetworkInstance, SnnError> {
    genome.validate()?;
    let n = n_exc + n_inh;
    if n == 0 {
        return Err(SnnError::Domain("network needs at least one neuron".into()));
    }

    let mut param_rng = stream(seed, STREAM_PARAMS);
    let params = (0..n)
        .map(|i| {
            let population = if i < n_exc {
                Population::Excitatory
            } else {
                Population::Inhibitory
            };
            sample_heterogeneous_params(population, param_rng.random::<f64>())
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut mask_rng = stream(seed, STREAM_MASK);
    let mut weight_rng = stream(seed, STREAM_WEIGHTS);
    let mut weights = WeightMatrix::zeros(n);
    for pre in 0..n {
        let scale = if pre < n_exc { genome.g_e } else { -genome.g_i };
        let col = &mut weights.columns[pre * n..(pre + 1) * n];
        for w in col.iter_mut() {
            let present = mask_rng.random::<f64>() < genome.f;
            let magnitude = weight_rng.random::<f64>();
            if present {
                *w = scale * magnitude;
            }
        }
    }

    Ok(NetworkInstance {
        n_exc,
        n_inh,
        params,
        weights,
        seed,
    })
}

/// Fresh network for one fitness evaluation, seeded from the run seed and
/// the evaluation's position in the GA.
pub fn regenerate_for_evaluation(
    genome: &NetworkGenome,
    global_seed: u64,
    generation: usize,
    individual: usize,
    n_exc: usize,
    n_inh: usize,
) -> Result<NetworkInstance, SnnError> {
    build_network(
        genome,
        evaluation_seed(global_seed, generation, individual),
        n_exc,
        n_inh,
    )
}

/// Thalamic current for one neuron and tick from a standard normal draw `z`.
#[inline]
pub fn thalamic_input(population: Population, mu_thal: f64, z: f64) -> f64 {
    match population {
        Population::Excitatory => mu_thal + THALAMIC_SD_EXC * z,
        Population::Inhibitory => mu_thal + THALAMIC_SD_INH * z,
    }
}

/// Summed pulse neuron `post` receives from the neurons in `fired`.
pub fn recurrent_current(weights: &WeightMatrix, fired: &[usize], post: usize) -> f64 {
    fired.iter().map(|&pre| weights.get(post, pre)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recurrent_current_sums_fired_columns() {
        let mut s = WeightMatrix::zeros(3);
        s.set(0, 1, 0.3);
        s.set(0, 2, -0.7);
        assert_eq!(recurrent_current(&s, &[], 0), 0.0);
        assert!((recurrent_current(&s, &[1, 2], 0) - (-0.4)).abs() < 1e-15);
    }

    #[test]
    fn thalamic_input_linear_form() {
        assert_eq!(thalamic_input(Population::Excitatory, 0.0, 0.0), 0.0);
        assert_eq!(thalamic_input(Population::Inhibitory, 3.0, 1.0), 5.0);
        assert_eq!(thalamic_input(Population::Excitatory, 1.0, -1.0), -4.0);
    }

    #[test]
    fn empty_mask_gives_zero_matrix() {
        let g = NetworkGenome::new(0.5, 1.0, 0.0, 0.0);
        let net = build_network(&g, 1, 40, 10).unwrap();
        assert_eq!(net.weights.nonzero_count(), 0);
    }

    #[test]
    fn invalid_genomes_are_rejected() {
        assert!(build_network(&NetworkGenome::new(0.5, 1.0, 1.5, 0.0), 0, 4, 1).is_err());
        assert!(build_network(&NetworkGenome::new(-0.5, 1.0, 1.0, 0.0), 0, 4, 1).is_err());
        assert!(build_network(&NetworkGenome::new(0.5, f64::NAN, 1.0, 0.0), 0, 4, 1).is_err());
        assert!(build_network(&NetworkGenome::BASELINE, 0, 0, 0).is_err());
    }

    #[test]
    fn separate_inhibitory_mean() {
        let mut g = NetworkGenome::new(0.5, 1.0, 1.0, 2.0);
        assert_eq!(g.thalamic_mean(Population::Inhibitory), 2.0);
        g.mu_thal_inh = Some(-1.0);
        assert_eq!(g.thalamic_mean(Population::Inhibitory), -1.0);
        assert_eq!(g.thalamic_mean(Population::Excitatory), 2.0);
    }

    #[test]
    fn weight_matrix_layout() {
        let m = WeightMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 0.0]]);
        assert_eq!(m.get(0, 1), 2.0);
        assert_eq!(m.column(0), &[1.0, 3.0]);
        assert_eq!(m.nonzeros(), vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 3.0)]);
    }
}

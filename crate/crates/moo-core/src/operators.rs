//! Real-coded variation and selection operators.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Closed interval a gene must stay in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub fn unbounded() -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn clip(&self, x: f64) -> f64 {
        x.clamp(self.lower, self.upper)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }
}

/// For each individual, how many members of the population share its niche.
pub fn niche_counts(niches: &[usize]) -> Vec<usize> {
    let max = niches.iter().copied().max().map_or(0, |m| m + 1);
    let mut per_niche = vec![0usize; max];
    for &n in niches {
        per_niche[n] += 1;
    }
    niches.iter().map(|&n| per_niche[n]).collect()
}

/// Binary tournament over a ranked population.
///
/// Two distinct candidates are drawn uniformly. The lower rank wins; on equal
/// ranks the one whose niche holds fewer members wins; a full tie is settled
/// by a fair coin.
pub fn tournament_select<R: Rng + ?Sized>(ranks: &[usize], crowding: &[usize], rng: &mut R) -> usize {
    let n = ranks.len();
    assert!(n > 0, "tournament on an empty population");
    assert_eq!(n, crowding.len());
    if n == 1 {
        return 0;
    }
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    match ranks[a].cmp(&ranks[b]).then(crowding[a].cmp(&crowding[b])) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => {
            if rng.random_bool(0.5) {
                a
            } else {
                b
            }
        }
    }
}

/// SBX spread factor for a uniform draw `u` in `[0, 1)`.
pub fn sbx_beta(u: f64, eta_c: f64) -> f64 {
    let exponent = 1.0 / (eta_c + 1.0);
    if u <= 0.5 {
        (2.0 * u).powf(exponent)
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(exponent)
    }
}

/// Unclipped SBX children for one gene:
/// `c1 = ((1+β)p1 + (1-β)p2) / 2`, `c2 = ((1-β)p1 + (1+β)p2) / 2`.
///
/// The child further from the mean is rounded onto the grid of `p1 + p2`
/// and its sibling is taken as `(p1 + p2) - c`, so the pair's sum equals the
/// parents' sum in floating point. The rounding moves the child by at most
/// half an ulp of the parents' sum. For parents of opposite sign the
/// subtraction can itself round and the identity is only approximate.
pub fn sbx_pair(p1: f64, p2: f64, beta: f64) -> (f64, f64) {
    if beta == 1.0 || p1 == p2 {
        return (p1, p2);
    }
    let sum = p1 + p2;
    let spread = beta * (0.5 * (p1 - p2).abs());
    let far = if sum == 0.0 {
        spread
    } else {
        let grid = ulp(sum);
        ((0.5 * sum + spread) / grid).round() * grid
    };
    let near = sum - far;
    if p1 >= p2 {
        (far, near)
    } else {
        (near, far)
    }
}

fn ulp(x: f64) -> f64 {
    let a = x.abs();
    if !a.is_finite() {
        return f64::MIN_POSITIVE;
    }
    f64::from_bits(a.to_bits() + 1) - a
}

/// Simulated binary crossover of two gene vectors.
///
/// With probability `p_c` the pair is recombined; each gene is then crossed
/// with probability one half using [`sbx_beta`] and [`sbx_pair`], and the
/// children are clipped to `bounds`.
pub fn sbx_crossover<R: Rng + ?Sized>(
    p1: &[f64],
    p2: &[f64],
    bounds: &[Bounds],
    eta_c: f64,
    p_c: f64,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(p1.len(), p2.len());
    assert_eq!(p1.len(), bounds.len());
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    if rng.random::<f64>() >= p_c {
        return (c1, c2);
    }
    for k in 0..p1.len() {
        if rng.random::<f64>() < 0.5 {
            let beta = sbx_beta(rng.random::<f64>(), eta_c);
            let (a, b) = sbx_pair(p1[k], p2[k], beta);
            c1[k] = bounds[k].clip(a);
            c2[k] = bounds[k].clip(b);
        }
    }
    (c1, c2)
}

/// Bounded polynomial mutation of a single gene for a given uniform draw.
///
/// The perturbation shrinks with the distance to the bound it moves toward,
/// so a gene sitting on a bound cannot be pushed past it and `u = 0.5`
/// leaves the gene unchanged.
pub fn mutate_gene(x: f64, bounds: Bounds, eta_m: f64, u: f64) -> f64 {
    let span = bounds.upper - bounds.lower;
    if !(span > 0.0) || !span.is_finite() {
        return x;
    }
    let exponent = eta_m + 1.0;
    let inv = 1.0 / exponent;
    let delta = if u < 0.5 {
        let xy = 1.0 - (x - bounds.lower) / span;
        let val = 1.0 - (1.0 - 2.0 * u) * (1.0 - xy.powf(exponent));
        val.powf(inv) - 1.0
    } else {
        let xy = 1.0 - (bounds.upper - x) / span;
        let val = 1.0 - (2.0 * u - 1.0) * (1.0 - xy.powf(exponent));
        1.0 - val.powf(inv)
    };
    if delta == 0.0 {
        return x;
    }
    bounds.clip(x + delta * span)
}

/// Mutates each gene independently with probability `p_m`.
pub fn polynomial_mutation<R: Rng + ?Sized>(
    genes: &[f64],
    eta_m: f64,
    p_m: f64,
    bounds: &[Bounds],
    rng: &mut R,
) -> Vec<f64> {
    assert_eq!(genes.len(), bounds.len());
    genes
        .iter()
        .zip(bounds)
        .map(|(&x, &b)| {
            if rng.random::<f64>() < p_m {
                mutate_gene(x, b, eta_m, rng.random::<f64>())
            } else {
                x
            }
        })
        .collect()
}

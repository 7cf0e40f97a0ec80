use serde::{Deserialize, Serialize};

use crate::error::MooError;

/// Structured reference directions on the unit simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferencePointSet {
    pub points: Vec<Vec<f64>>,
    pub n_objectives: usize,
    pub partitions: usize,
}

impl ReferencePointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Binomial coefficient `C(n, k)`, saturating on overflow.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// Smallest partition count `p` whose Das-Dennis lattice has at least
/// `population` points for `n_objectives` objectives.
pub fn partitions_for(n_objectives: usize, population: usize) -> usize {
    let mut p = 1;
    while binomial(n_objectives + p - 1, p) < population {
        p += 1;
    }
    p
}

/// Das-Dennis simplex lattice: every vector of `n_objectives` non-negative
/// multiples of `1/partitions` summing to one, in lexicographic order.
pub fn das_dennis(n_objectives: usize, partitions: usize) -> Result<ReferencePointSet, MooError> {
    if n_objectives < 2 {
        return Err(MooError::InvalidConfig(format!(
            "reference points need at least 2 objectives, got {n_objectives}"
        )));
    }
    if partitions < 1 {
        return Err(MooError::InvalidConfig(
            "reference points need at least 1 partition".into(),
        ));
    }

    let mut points = Vec::with_capacity(binomial(n_objectives + partitions - 1, partitions));
    let mut counts = Vec::with_capacity(n_objectives);
    fill(&mut points, &mut counts, n_objectives, partitions, partitions);

    Ok(ReferencePointSet {
        points,
        n_objectives,
        partitions,
    })
}

fn fill(
    out: &mut Vec<Vec<f64>>,
    prefix: &mut Vec<usize>,
    n_objectives: usize,
    remaining: usize,
    partitions: usize,
) {
    if prefix.len() == n_objectives - 1 {
        prefix.push(remaining);
        out.push(
            prefix
                .iter()
                .map(|&k| k as f64 / partitions as f64)
                .collect(),
        );
        prefix.pop();
        return;
    }
    for k in 0..=remaining {
        prefix.push(k);
        fill(out, prefix, n_objectives, remaining - k, partitions);
        prefix.pop();
    }
}

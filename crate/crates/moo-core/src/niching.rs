use crate::normalize::normalize_objectives;
use crate::reference::ReferencePointSet;

/// Closest reference direction of a normalized objective vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Association {
    pub niche: usize,
    pub distance: f64,
}

/// Associates every normalized vector with the reference direction at the
/// smallest perpendicular distance. Ties go to the lowest reference index.
pub fn associate<V: AsRef<[f64]>>(normalized: &[V], refs: &ReferencePointSet) -> Vec<Association> {
    normalized
        .iter()
        .map(|f| {
            let f = f.as_ref();
            let mut best = Association {
                niche: 0,
                distance: f64::INFINITY,
            };
            for (j, w) in refs.points.iter().enumerate() {
                let d = perpendicular_distance(f, w);
                if d < best.distance {
                    best = Association { niche: j, distance: d };
                }
            }
            best
        })
        .collect()
}

fn perpendicular_distance(f: &[f64], w: &[f64]) -> f64 {
    let ww: f64 = w.iter().map(|x| x * x).sum();
    let fw: f64 = f.iter().zip(w).map(|(a, b)| a * b).sum();
    let t = fw / ww;
    f.iter()
        .zip(w)
        .map(|(a, b)| {
            let r = a - t * b;
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// Outcome of one NSGA-III survival step.
#[derive(Debug, Clone, PartialEq)]
pub struct NicheSelection {
    /// Indices into the candidate population, whole fronts first, then the
    /// members picked from the splitting front in pick order.
    pub survivors: Vec<usize>,
    /// Rank (front index) of each survivor.
    pub ranks: Vec<usize>,
    /// Reference-point association of each survivor.
    pub associations: Vec<Association>,
    /// Ideal point after including every considered candidate.
    pub ideal: Vec<f64>,
    /// Whether the last front had to be split by niching.
    pub niching_used: bool,
}

/// Selects `target` survivors from already sorted `fronts`.
///
/// Whole fronts are taken while they fit. The candidate set (those fronts
/// plus the splitting front) is normalized and associated with `refs`; the
/// remaining slots are filled from the splitting front by repeatedly taking
/// the reference point with the lowest niche count among those that still
/// have candidates (lowest reference index on ties) and admitting its
/// closest candidate (lowest individual index on ties).
///
/// When the fronts hold fewer than `target` individuals, all are returned.
pub fn associate_and_niche<V: AsRef<[f64]>>(
    objectives: &[V],
    fronts: &[Vec<usize>],
    refs: &ReferencePointSet,
    target: usize,
    ideal: &[f64],
) -> NicheSelection {
    let mut considered: Vec<usize> = Vec::new();
    let mut rank_of: Vec<usize> = Vec::new();
    let mut last_front = 0;
    for (k, front) in fronts.iter().enumerate() {
        if considered.len() >= target {
            break;
        }
        considered.extend_from_slice(front);
        rank_of.extend(std::iter::repeat(k).take(front.len()));
        last_front = k;
    }

    let subset: Vec<&[f64]> = considered.iter().map(|&i| objectives[i].as_ref()).collect();
    let normalized = normalize_objectives(&subset, ideal);
    let assoc = associate(&normalized.values, refs);

    if considered.len() <= target {
        return NicheSelection {
            survivors: considered,
            ranks: rank_of,
            associations: assoc,
            ideal: normalized.ideal,
            niching_used: false,
        };
    }

    let accepted = considered.len() - fronts[last_front].len();
    let mut niche_count = vec![0usize; refs.len()];
    for a in &assoc[..accepted] {
        niche_count[a.niche] += 1;
    }

    // positions (into `considered`) of splitting-front members still available
    let mut pool: Vec<usize> = (accepted..considered.len()).collect();
    let mut picked: Vec<usize> = Vec::with_capacity(target - accepted);
    while accepted + picked.len() < target {
        let niche = pool
            .iter()
            .map(|&p| assoc[p].niche)
            .min_by_key(|&j| (niche_count[j], j))
            .expect("splitting front cannot run out before the target is reached");
        let (slot, &pos) = pool
            .iter()
            .enumerate()
            .filter(|(_, &p)| assoc[p].niche == niche)
            .min_by(|(_, &a), (_, &b)| {
                assoc[a]
                    .distance
                    .total_cmp(&assoc[b].distance)
                    .then(considered[a].cmp(&considered[b]))
            })
            .expect("chosen niche has a candidate");
        pool.remove(slot);
        niche_count[niche] += 1;
        picked.push(pos);
    }

    let positions: Vec<usize> = (0..accepted).chain(picked).collect();
    NicheSelection {
        survivors: positions.iter().map(|&p| considered[p]).collect(),
        ranks: positions.iter().map(|&p| rank_of[p]).collect(),
        associations: positions.iter().map(|&p| assoc[p]).collect(),
        ideal: normalized.ideal,
        niching_used: true,
    }
}

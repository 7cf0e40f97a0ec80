use moo_core::{
    mutate_gene, polynomial_mutation, sbx_beta, sbx_crossover, sbx_pair, tournament_select, Bounds,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TRIALS: usize = 100_000;

#[test]
fn sbx_mean_preserved_exactly_for_non_negative_parents() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..TRIALS {
        let scale = [1.0, 2.0, 20.0, 1e-3][rng.random_range(0..4)];
        let p1 = rng.random::<f64>() * scale;
        let p2 = rng.random::<f64>() * scale;
        let beta = sbx_beta(rng.random::<f64>(), 30.0);
        let (c1, c2) = sbx_pair(p1, p2, beta);
        assert_eq!((c1 + c2) / 2.0, (p1 + p2) / 2.0, "p1={p1} p2={p2} beta={beta}");
    }
}

#[test]
fn sbx_mean_preserved_when_parents_cancel() {
    for (p1, p2) in [(-3.5, 3.5), (-1e-3, 1e-3)] {
        let (c1, c2) = sbx_pair(p1, p2, 1.3);
        assert_eq!(c1 + c2, 0.0);
    }
}

/// E[beta] for the SBX spread distribution by midpoint quadrature over u.
fn expected_beta(eta: f64) -> f64 {
    let steps = 2_000_000;
    let h = 1.0 / steps as f64;
    (0..steps)
        .map(|k| {
            let u = (k as f64 + 0.5) * h;
            let e = 1.0 / (eta + 1.0);
            if u <= 0.5 {
                (2.0 * u).powf(e)
            } else {
                (2.0 * (1.0 - u)).powf(-e)
            }
        })
        .sum::<f64>()
        * h
}

#[test]
fn sbx_child_means_match_spread_expectation() {
    let (p1, p2, eta) = (0.2, 0.8, 30.0);
    // gene crossed with probability 1/2, otherwise copied
    let e_beta = expected_beta(eta);
    let expected_c1 = 0.5 * p1 + 0.5 * (0.5 * (p1 + p2) + e_beta * 0.5 * (p1 - p2));
    let expected_c2 = 0.5 * p2 + 0.5 * (0.5 * (p1 + p2) - e_beta * 0.5 * (p1 - p2));

    let bounds = [Bounds::unbounded()];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut s1 = Vec::with_capacity(TRIALS);
    let mut s2 = Vec::with_capacity(TRIALS);
    for _ in 0..TRIALS {
        let (c1, c2) = sbx_crossover(&[p1], &[p2], &bounds, eta, 1.0, &mut rng);
        assert_eq!((c1[0] + c2[0]) / 2.0, (p1 + p2) / 2.0);
        s1.push(c1[0]);
        s2.push(c2[0]);
    }
    for (samples, expected) in [(s1, expected_c1), (s2, expected_c2)] {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!(
            (mean - expected).abs() < 3.0 * se,
            "mean {mean} expected {expected} se {se}"
        );
    }
}

#[test]
fn mutation_never_leaves_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let bounds = [
        Bounds::new(0.0, 1.0),
        Bounds::new(0.0, 2.0),
        Bounds::new(-10.0, 10.0),
        Bounds::new(-5.0, 5.0),
    ];
    for _ in 0..TRIALS {
        let genes: Vec<f64> = bounds
            .iter()
            .map(|b| {
                // sometimes sit exactly on a bound
                match rng.random_range(0..10) {
                    0 => b.lower,
                    1 => b.upper,
                    _ => b.lower + rng.random::<f64>() * (b.upper - b.lower),
                }
            })
            .collect();
        let mutated = polynomial_mutation(&genes, 20.0, 1.0, &bounds, &mut rng);
        for (x, b) in mutated.iter().zip(&bounds) {
            assert!(b.contains(*x), "{x} outside {b:?}");
        }
    }
}

#[test]
fn mutation_of_mid_range_gene_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let b = Bounds::new(0.0, 1.0);
    let steps: Vec<f64> = (0..TRIALS)
        .map(|_| mutate_gene(0.5, b, 20.0, rng.random::<f64>()) - 0.5)
        .collect();
    let n = steps.len() as f64;
    let mean = steps.iter().sum::<f64>() / n;
    let var = steps.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let skew = steps.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n / var.powf(1.5);
    assert!(mean.abs() < 3.0 * (var / n).sqrt(), "mean {mean}");
    assert!(skew.abs() < 3.0 * (6.0 / n).sqrt(), "skew {skew}");
}

#[test]
fn tournament_frequencies_match_pair_enumeration() {
    let ranks = [0usize, 0, 1, 1, 2, 0];
    let crowding = [3usize, 1, 1, 2, 1, 3];
    let n = ranks.len();

    let mut exact = vec![0.0; n];
    let pair_p = 1.0 / (n * (n - 1)) as f64;
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let key = |i: usize| (ranks[i], crowding[i]);
            if key(a) < key(b) {
                exact[a] += pair_p;
            } else if key(b) < key(a) {
                exact[b] += pair_p;
            } else {
                exact[a] += pair_p / 2.0;
                exact[b] += pair_p / 2.0;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut wins = vec![0usize; n];
    for _ in 0..TRIALS {
        wins[tournament_select(&ranks, &crowding, &mut rng)] += 1;
    }
    for i in 0..n {
        let p = exact[i];
        let observed = wins[i] as f64 / TRIALS as f64;
        let sigma = (p * (1.0 - p) / TRIALS as f64).sqrt();
        assert!(
            (observed - p).abs() <= 3.0 * sigma.max(1e-12),
            "individual {i}: observed {observed}, exact {p}"
        );
    }
}

proptest! {
    #[test]
    fn crossover_children_stay_in_bounds(
        p1 in 0.0f64..2.0, p2 in 0.0f64..2.0, seed in any::<u64>()
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = [Bounds::new(0.0, 2.0)];
        let (c1, c2) = sbx_crossover(&[p1], &[p2], &b, 30.0, 1.0, &mut rng);
        prop_assert!(b[0].contains(c1[0]) && b[0].contains(c2[0]));
    }

    #[test]
    fn mutation_stays_in_bounds(x in -10.0f64..=10.0, u in 0.0f64..1.0, eta in 0.0f64..100.0) {
        let y = mutate_gene(x, Bounds::new(-10.0, 10.0), eta, u);
        prop_assert!((-10.0..=10.0).contains(&y));
    }
}

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use snnfit_core::network::{
    build_network, recurrent_current, regenerate_for_evaluation, thalamic_input, NetworkGenome, WeightMatrix,
};
use snnfit_core::neuron::Population;
use snnfit_core::seed::noise_seed_for;
use snnfit_core::simulator::{run_simulation, run_simulation_with, SimOptions};

#[test]
fn baseline_weights_have_reference_ranges() {
    let net = build_network(&NetworkGenome::BASELINE, 7, 800, 200).unwrap();
    assert_eq!(net.len(), 1000);
    for pre in 0..1000 {
        for &w in net.weights.column(pre) {
            if pre < 800 {
                assert!((0.0..=0.5).contains(&w));
            } else {
                assert!((-1.0..=0.0).contains(&w));
            }
        }
    }
    // dense: only exact-zero uniform draws could leave a gap
    assert!(net.weights.nonzero_count() >= 999_990);
}

#[test]
fn sparse_count_follows_binomial() {
    let g = NetworkGenome::new(0.5, 1.0, 0.2, 0.0);
    for seed in 0..3 {
        let nnz = build_network(&g, seed, 800, 200).unwrap().weights.nonzero_count();
        // mean 200000, sd 400
        assert!(nnz.abs_diff(200_000) <= 2000, "seed {seed}: {nnz}");
    }
}

#[test]
fn nonzero_count_increases_with_f() {
    let mut means = Vec::new();
    for f in [0.2, 0.5, 1.0] {
        let g = NetworkGenome::new(0.5, 1.0, f, 0.0);
        let total: usize = (0..100)
            .map(|s| build_network(&g, s, 80, 20).unwrap().weights.nonzero_count())
            .sum();
        means.push(total as f64 / 100.0);
    }
    assert!(means[0] < means[1] && means[1] < means[2], "{means:?}");
}

#[test]
fn scaling_excitatory_scale_scales_entries_exactly() {
    let a = NetworkGenome::new(0.25, 0.7, 0.6, 0.0);
    let b = NetworkGenome { g_e: 0.5, ..a };
    let na = build_network(&a, 13, 80, 20).unwrap();
    let nb = build_network(&b, 13, 80, 20).unwrap();
    for pre in 0..100 {
        for post in 0..100 {
            let (x, y) = (na.weights.get(post, pre), nb.weights.get(post, pre));
            if pre < 80 {
                assert_eq!(y, 2.0 * x);
            } else {
                assert_eq!(y, x);
            }
        }
    }
    assert_eq!(na.params, nb.params);
}

#[test]
fn thalamic_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 1_000_000;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..n {
        let x = thalamic_input(Population::Excitatory, 1.0, rng.sample(StandardNormal));
        sum += x;
        sq += x * x;
    }
    let mean = sum / n as f64;
    let sd = (sq / n as f64 - mean * mean).sqrt();
    assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
    assert!((sd - 5.0).abs() < 0.02, "sd {sd}");
}

#[test]
fn recurrent_current_matches_entrywise_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..10).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let s = WeightMatrix::from_rows(&rows);
        let fired: Vec<usize> = (0..10).filter(|_| rng.random_bool(0.4)).collect();
        for i in 0..10 {
            let mut expected = 0.0;
            for j in 0..10 {
                if fired.contains(&j) {
                    expected += rows[i][j];
                }
            }
            assert_eq!(recurrent_current(&s, &fired, i), expected);
        }
    }
}

#[test]
fn regeneration_is_deterministic_and_seed_sensitive() {
    let g = NetworkGenome::new(0.5, 1.0, 0.5, 0.0);
    let a = regenerate_for_evaluation(&g, 42, 3, 7, 80, 20).unwrap();
    let b = regenerate_for_evaluation(&g, 42, 3, 7, 80, 20).unwrap();
    assert_eq!(a, b);
    let c = regenerate_for_evaluation(&g, 42, 3, 8, 80, 20).unwrap();
    assert_ne!(a.weights, c.weights);

    let d = regenerate_for_evaluation(&g, 43, 3, 7, 80, 20).unwrap();
    let ra = run_simulation(&a, &g, 500, noise_seed_for(a.seed)).unwrap();
    let rd = run_simulation(&d, &g, 500, noise_seed_for(d.seed)).unwrap();
    assert_ne!(ra.events, rd.events);
}

#[test]
fn zero_coupling_equals_empty_mask() {
    let uncoupled = NetworkGenome::new(0.0, 0.0, 1.0, 0.0);
    let empty = NetworkGenome::new(0.5, 1.0, 0.0, 0.0);
    for seed in 0..3 {
        let a = build_network(&uncoupled, seed, 160, 40).unwrap();
        let b = build_network(&empty, seed, 160, 40).unwrap();
        let ra = run_simulation(&a, &uncoupled, 1000, seed + 100).unwrap();
        let rb = run_simulation(&b, &empty, 1000, seed + 100).unwrap();
        assert!(!ra.events.is_empty());
        assert_eq!(ra, rb);
    }
}

#[test]
fn weight_dump_lists_nonzeros() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    let net = build_network(&NetworkGenome::new(0.5, 1.0, 0.3, 0.0), 1, 8, 2).unwrap();
    net.dump_weights_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("row,col,weight"));
    let rows: Vec<(usize, usize, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows, net.weights.nonzeros());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sign_segregation(g_e in 0.0f64..1.0, g_i in 0.0f64..2.0, f in 0.0f64..=1.0, seed in any::<u64>()) {
        let net = build_network(&NetworkGenome::new(g_e, g_i, f, 0.0), seed, 40, 10).unwrap();
        for pre in 0..50 {
            for &w in net.weights.column(pre) {
                if pre < 40 {
                    prop_assert!(w >= 0.0 && w <= g_e);
                } else {
                    prop_assert!(w <= 0.0 && w >= -g_i);
                }
            }
        }
    }

    #[test]
    fn build_is_a_function_of_seed(seed in any::<u64>(), f in 0.0f64..=1.0) {
        let g = NetworkGenome::new(0.5, 1.0, f, 0.0);
        prop_assert_eq!(build_network(&g, seed, 20, 5).unwrap(), build_network(&g, seed, 20, 5).unwrap());
    }
}

#[test]
fn noise_off_hook_only_affects_drive() {
    let g = NetworkGenome::new(0.5, 1.0, 1.0, 10.0);
    let net = build_network(&g, 4, 40, 10).unwrap();
    let opts = SimOptions {
        noise: false,
        ..SimOptions::default()
    };
    let a = run_simulation_with(&net, &g, 300, 1, &opts).unwrap();
    let b = run_simulation_with(&net, &g, 300, 999, &opts).unwrap();
    assert_eq!(a.record, b.record);
    assert!(!a.record.events.is_empty());
}

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snnfit_core::network::{build_network, NetworkGenome};
use snnfit_core::neuron::{detect_and_reset, integrate_tick, NeuronState};
use snnfit_core::seed::noise_seed_for;
use snnfit_core::simulator::{
    export_raster, export_rate_series, import_raster, instantaneous_rates, mean_rates, run_simulation,
    run_simulation_with, SimOptions, SpikeEvent, SpikeRecord,
};

fn random_record(rng: &mut impl Rng, n_exc: usize, n_inh: usize, duration: usize, p: f64) -> SpikeRecord {
    let mut events = Vec::new();
    for tick in 0..duration {
        for neuron in 0..n_exc + n_inh {
            if rng.random_bool(p) {
                events.push(SpikeEvent { tick, neuron });
            }
        }
    }
    SpikeRecord {
        events,
        duration,
        n_exc,
        n_inh,
    }
}

/// Counts spikes neuron by neuron and converts to Hz.
fn recount(rec: &SpikeRecord, from: usize, to: usize) -> (f64, f64, f64) {
    let n = rec.n_exc + rec.n_inh;
    let mut per_neuron = vec![0usize; n];
    for e in &rec.events {
        if e.tick >= from && e.tick < to {
            per_neuron[e.neuron] += 1;
        }
    }
    let exc: usize = per_neuron[..rec.n_exc].iter().sum();
    let inh: usize = per_neuron[rec.n_exc..].iter().sum();
    let hz = |c: usize, size: usize| {
        if size == 0 {
            0.0
        } else {
            c as f64 * 1000.0 / (size as f64 * (to - from) as f64)
        }
    };
    (hz(exc, rec.n_exc), hz(inh, rec.n_inh), hz(exc + inh, n))
}

#[test]
fn rate_metrics_match_brute_force_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let n_exc = rng.random_range(1..40);
        let n_inh = rng.random_range(0..12);
        let duration = rng.random_range(1..300);
        let p = rng.random_range(0.0..0.2);
        let rec = random_record(&mut rng, n_exc, n_inh, duration, p);
        let m = mean_rates(&rec);
        assert_eq!((m.r_exc, m.r_inh, m.r_all), recount(&rec, 0, duration));

        let bin = rng.random_range(1..50);
        let s = instantaneous_rates(&rec, bin).unwrap();
        assert_eq!(s.len(), duration.div_ceil(bin));
        for k in 0..s.len() {
            let from = k * bin;
            let to = (from + bin).min(duration);
            assert_eq!((s.r_exc[k], s.r_inh[k], s.r_all[k]), recount(&rec, from, to));
        }
    }
}

#[test]
fn coarse_bins_are_sums_of_fine_bins() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rec = random_record(&mut rng, 80, 20, 1000, 0.01);
    let fine = instantaneous_rates(&rec, 1).unwrap();
    let coarse = instantaneous_rates(&rec, 10).unwrap();
    for k in 0..coarse.len() {
        let mean: f64 = fine.r_all[10 * k..10 * k + 10].iter().sum::<f64>() / 10.0;
        assert!((mean - coarse.r_all[k]).abs() <= 1e-9 * coarse.r_all[k].max(1.0));
    }
}

#[test]
fn binned_mean_equals_overall_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let rec = random_record(&mut rng, 30, 10, 400, 0.02);
        let s = instantaneous_rates(&rec, 1).unwrap();
        let m = mean_rates(&rec);
        let avg = s.r_all.iter().sum::<f64>() / s.len() as f64;
        assert!((avg - m.r_all).abs() <= 1e-9 * m.r_all.max(1e-300));
    }
}

#[test]
fn concatenated_records_average_their_rates() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = random_record(&mut rng, 30, 10, 500, 0.01);
    let b = random_record(&mut rng, 30, 10, 500, 0.03);
    let (ma, mb) = (mean_rates(&a), mean_rates(&b));
    let mc = mean_rates(&a.concat(&b).unwrap());
    assert!((mc.r_all - 0.5 * (ma.r_all + mb.r_all)).abs() < 1e-12);
    assert!((mc.r_exc - 0.5 * (ma.r_exc + mb.r_exc)).abs() < 1e-12);
}

#[test]
fn single_neuron_matches_standalone_loop() {
    let g = NetworkGenome::new(0.0, 0.0, 1.0, 10.0);
    let net = build_network(&g, 17, 1, 0).unwrap();
    let opts = SimOptions {
        noise: false,
        ..SimOptions::default()
    };
    let rec = run_simulation_with(&net, &g, 1000, 0, &opts).unwrap().record;

    let p = net.params[0];
    let mut s = NeuronState::resting(&p);
    let mut expected = Vec::new();
    for tick in 0..1000 {
        let (next, fired) = detect_and_reset(s, &p);
        if fired {
            expected.push(SpikeEvent { tick, neuron: 0 });
        }
        s = integrate_tick(next, &p, 10.0).unwrap();
    }
    assert!(expected.len() > 5);
    assert_eq!(rec.events, expected);
}

#[test]
fn thread_count_does_not_change_output() {
    let g = NetworkGenome::BASELINE;
    let net = build_network(&g, 5, 800, 200).unwrap();
    let serial = run_simulation(&net, &g, 300, 77).unwrap();
    for threads in [1, 3, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let opts = SimOptions {
            parallel: true,
            ..SimOptions::default()
        };
        let par = pool
            .install(|| run_simulation_with(&net, &g, 300, 77, &opts))
            .unwrap()
            .record;
        assert_eq!(serial, par, "{threads} threads");
    }
}

#[test]
fn baseline_network_is_active_and_fluctuating() {
    let g = NetworkGenome::BASELINE;
    let net = build_network(&g, 1, 800, 200).unwrap();
    let rec = run_simulation(&net, &g, 1000, noise_seed_for(1)).unwrap();
    rec.validate().unwrap();
    let m = mean_rates(&rec);
    assert!(m.r_exc > 0.0 && m.r_inh > 0.0);
    let s = instantaneous_rates(&rec, 10).unwrap();
    let mean = s.r_all.iter().sum::<f64>() / s.len() as f64;
    let var = s.r_all.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / s.len() as f64;
    assert!(var.sqrt() > 0.2 * mean, "population rate barely fluctuates");
    assert!(s.r_all.iter().all(|&r| r <= 1000.0));
}

#[test]
fn raster_files() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    export_raster(&SpikeRecord::empty(3, 1, 10), &empty).unwrap();
    assert_eq!(std::fs::read_to_string(&empty).unwrap(), "tick,neuron,population\n");

    let rec = SpikeRecord {
        events: vec![
            SpikeEvent { tick: 0, neuron: 3 },
            SpikeEvent { tick: 2, neuron: 0 },
            SpikeEvent { tick: 2, neuron: 1 },
        ],
        duration: 10,
        n_exc: 3,
        n_inh: 1,
    };
    let path = dir.path().join("r.csv");
    export_raster(&rec, &path).unwrap();
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "tick,neuron,population\n0,3,inh\n2,0,exc\n2,1,exc\n"
    );
}

#[test]
fn raster_round_trip_preserves_rates() {
    let dir = tempfile::tempdir().unwrap();
    let g = NetworkGenome::BASELINE;
    let net = build_network(&g, 2, 160, 40).unwrap();
    let rec = run_simulation(&net, &g, 1000, 3).unwrap();
    let path = dir.path().join("raster.csv");
    export_raster(&rec, &path).unwrap();
    let back = import_raster(&path, 160, 40, 1000).unwrap();
    assert_eq!(back, rec);
    assert_eq!(mean_rates(&back), mean_rates(&rec));

    let rates = dir.path().join("rates.csv");
    export_rate_series(&instantaneous_rates(&rec, 1).unwrap(), &rates).unwrap();
    let text = std::fs::read_to_string(&rates).unwrap();
    assert!(text.starts_with("bin_start_ms,r_exc,r_inh,r_all\n"));
    assert_eq!(text.lines().count(), 1001);
}

#[test]
fn import_rejects_mislabelled_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "tick,neuron,population\n0,0,inh\n").unwrap();
    assert!(import_raster(&path, 1, 1, 10).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rates_are_physical(seed in any::<u64>(), p in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rec = random_record(&mut rng, 6, 2, 20, p);
        let m = mean_rates(&rec);
        for r in [m.r_exc, m.r_inh, m.r_all] {
            prop_assert!((0.0..=1000.0).contains(&r));
        }
        let weighted = (6.0 * m.r_exc + 2.0 * m.r_inh) / 8.0;
        prop_assert!((m.r_all - weighted).abs() <= 1e-9 * m.r_all.max(1.0));
    }
}

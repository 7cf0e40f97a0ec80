use moo_core::{EvalTag, Problem};
use proptest::prelude::*;
use snnfit_core::network::{build_network, NetworkGenome};
use snnfit_core::objectives::{
    evaluate_three_objective, evaluate_two_objective, experiment_grid, repeat_seeds, EvalSettings, RateTargets,
    SnnProblem, StudyFamily, StudySpec,
};
use snnfit_core::seed::{evaluation_seed, noise_seed_for};
use snnfit_core::simulator::{mean_rates, run_simulation};

fn small() -> EvalSettings {
    EvalSettings {
        n_exc: 160,
        n_inh: 40,
        duration: 500,
        ..EvalSettings::default()
    }
}

fn fig3_spec(f: f64) -> StudySpec {
    let fam = StudyFamily {
        f_values: vec![f],
        ..StudyFamily::fig3()
    };
    experiment_grid(&fam, 11).unwrap().remove(0)
}

fn tag(generation: usize, index: usize) -> EvalTag {
    EvalTag { generation, index }
}

#[test]
fn baseline_objectives_match_standalone_run() {
    let spec = fig3_spec(1.0);
    let settings = EvalSettings::default();
    let t = tag(2, 5);
    let e = evaluate_two_objective(&[0.5, 1.0], &spec, &settings, t).unwrap();

    let net_seed = evaluation_seed(spec.seed, 2, 5);
    let genome = NetworkGenome::BASELINE;
    let net = build_network(&genome, net_seed, 800, 200).unwrap();
    let r = mean_rates(&run_simulation(&net, &genome, 1000, noise_seed_for(net_seed)).unwrap());
    assert_eq!(e.objectives, vec![(r.r_exc - 5.0).abs(), (r.r_inh - 2.0).abs()]);
    assert_eq!(e.rates, vec![r]);
}

#[test]
fn three_objective_rates_agree_with_two_objective_mode() {
    let three = experiment_grid(&StudyFamily::fig5(), 3).unwrap().remove(0);
    let settings = small();
    for (k, genes) in [[0.0, 0.3, 1.2, 0.4], [1.5, 0.7, 0.2, 0.9], [-2.0, 0.1, 1.9, 0.05]]
        .iter()
        .enumerate()
    {
        let t = tag(1, k);
        let e3 = evaluate_three_objective(genes, &three, &settings, t).unwrap();
        let two = StudySpec {
            fixed_f: Some(genes[3]),
            mu_thal: genes[0],
            ..fig3_spec(genes[3])
        };
        let two = StudySpec {
            seed: three.seed,
            targets: three.targets,
            ..two
        };
        let e2 = evaluate_two_objective(&genes[1..3], &two, &settings, t).unwrap();
        assert_eq!(&e3.objectives[..2], &e2.objectives[..]);
        assert_eq!(e3.objectives[2], genes[3]);
    }
}

#[test]
fn swapped_targets_only_change_the_subtraction() {
    let settings = small();
    let a = fig3_spec(0.5);
    let b = StudySpec {
        targets: RateTargets::new(a.targets.inh, a.targets.exc),
        ..a.clone()
    };
    let t = tag(0, 3);
    let ea = evaluate_two_objective(&[0.4, 1.1], &a, &settings, t).unwrap();
    let eb = evaluate_two_objective(&[0.4, 1.1], &b, &settings, t).unwrap();
    assert_eq!(ea.rates, eb.rates);
    let r = ea.rates[0];
    assert_eq!(eb.objectives, vec![(r.r_exc - 2.0).abs(), (r.r_inh - 5.0).abs()]);
}

#[test]
fn repeats_average_independent_simulations() {
    let spec = fig3_spec(1.0);
    let settings = EvalSettings {
        n_repeats: 3,
        ..small()
    };
    let t = tag(4, 1);
    let e = evaluate_two_objective(&[0.5, 1.0], &spec, &settings, t).unwrap();
    assert_eq!(e.rates.len(), 3);
    let mut d = [0.0; 2];
    for (k, r) in e.rates.iter().enumerate() {
        let (net_seed, noise) = repeat_seeds(spec.seed, t, k);
        let net = build_network(&NetworkGenome::BASELINE, net_seed, 160, 40).unwrap();
        let again = mean_rates(&run_simulation(&net, &NetworkGenome::BASELINE, 500, noise).unwrap());
        assert_eq!(*r, again);
        d[0] += (r.r_exc - 5.0).abs();
        d[1] += (r.r_inh - 2.0).abs();
    }
    assert_eq!(e.objectives, vec![d[0] / 3.0, d[1] / 3.0]);
}

#[test]
fn problem_adapter_reports_objective_count() {
    let p = SnnProblem::new(fig3_spec(1.0), small()).unwrap();
    assert_eq!(p.n_objectives(), 2);
    let p3 = SnnProblem::new(experiment_grid(&StudyFamily::fig5(), 0).unwrap().remove(0), small()).unwrap();
    assert_eq!(p3.n_objectives(), 3);
    assert_eq!(p3.evaluate(&[0.0, 0.5, 1.0, 0.3], tag(0, 0)).unwrap().len(), 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn objectives_are_non_negative(g_e in 0.0f64..1.0, g_i in 0.0f64..2.0, mu in -10.0f64..10.0, f in 0.0f64..=1.0, idx in 0usize..1000) {
        let spec = experiment_grid(&StudyFamily::fig5(), 9).unwrap().remove(1);
        let settings = EvalSettings { n_exc: 40, n_inh: 10, duration: 200, ..EvalSettings::default() };
        let e = evaluate_three_objective(&[mu, g_e, g_i, f], &spec, &settings, tag(0, idx)).unwrap();
        prop_assert!(e.objectives.iter().all(|&o| o >= 0.0));
        prop_assert_eq!(e.objectives[2], f);
    }
}

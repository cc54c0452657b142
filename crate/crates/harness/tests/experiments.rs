use apdg_core::apdg::RegimeChoice;
use apdg_core::problem::StochasticOracleSpec;
use apdg_harness::config::{parse_json, ExperimentConfig, Mode, Variance};
use apdg_harness::experiments::{
    centralized_checks, demo_instance, fit_line, plan_centralized, rate_consistency, scaling_sweep,
    sweep_instance, Check, SweepSpec,
};
use proptest::prelude::*;
use std::path::Path;

#[test]
fn fit_recovers_an_exact_line() {
    let pts: Vec<(f64, f64)> = (0..6).map(|i| (i as f64, 2.0 - 0.5 * i as f64)).collect();
    let f = fit_line(&pts).unwrap();
    assert!((f.slope + 0.5).abs() < 1e-12);
    assert!((f.intercept - 2.0).abs() < 1e-12);
    assert!((f.r2 - 1.0).abs() < 1e-12);
    assert!(fit_line(&pts[..1]).is_none());
    assert!(fit_line(&[(1.0, 1.0), (1.0, 2.0)]).is_none());
}

#[test]
fn fit_r2_matches_hand_value() {
    // y = (1, 3, 2) at x = (0, 1, 2): slope 1/2, intercept 3/2, SSE 1.5, SST 2
    let f = fit_line(&[(0.0, 1.0), (1.0, 3.0), (2.0, 2.0)]).unwrap();
    assert!((f.slope - 0.5).abs() < 1e-12);
    assert!((f.intercept - 1.5).abs() < 1e-12);
    assert!((f.r2 - 0.25).abs() < 1e-12);
}

#[test]
fn checks_compare_inclusively() {
    assert!(Check::at_most("a", 1.0, 1.0).passed);
    assert!(!Check::at_most("a", 1.0 + 1e-15, 1.0).passed);
    assert!(Check::at_least("b", 0.95, 0.95).passed);
    assert!(!Check::at_most("c", f64::NAN, 1.0).passed);
}

#[test]
fn variances_expand_per_node() {
    assert_eq!(Variance::Uniform(0.5).expand(3).unwrap(), vec![0.5; 3]);
    assert_eq!(
        Variance::PerNode(vec![1.0, 2.0]).expand(2).unwrap(),
        vec![1.0, 2.0]
    );
    assert!(Variance::PerNode(vec![1.0]).expand(2).is_err());
}

#[test]
fn config_defaults() {
    let c: ExperimentConfig = parse_json(
        r#"{ "mode": "centralized", "problem": { "file": "p.json" }, "eps": 0.1, "sigma_f2": [1, 2] }"#,
        Path::new("c.json"),
    )
    .unwrap();
    assert_eq!(c.mode, Mode::Centralized);
    assert_eq!(c.regime, RegimeChoice::Auto);
    assert_eq!((c.seeds, c.tau, c.trials), (1, 1, 64));
    assert_eq!(c.sigma_f2, Variance::PerNode(vec![1.0, 2.0]));
    assert!(parse_json::<ExperimentConfig>(r#"{ "mode": "x" }"#, Path::new("c.json")).is_err());
}

#[test]
fn sweep_instance_leaves_weak_directions_uncoupled() {
    let spec = SweepSpec {
        dim: 3,
        ..SweepSpec::default()
    };
    let p = sweep_instance(&spec, 1e-3, 1e-2).unwrap();
    let g = p.global_constants();
    assert_eq!((g.mu_x, g.l_x, g.mu_y, g.l_y), (1e-3, 1.0, 1e-2, 1.0));
    assert_eq!(p.coupling()[(0, 0)], 0.0);
    assert_eq!(p.coupling()[(2, 2)], 1.0);
    assert!(sweep_instance(&SweepSpec { dim: 1, ..spec }, 1.0, 1.0).is_err());
}

#[test]
fn diagonal_cells_have_coinciding_predictors() {
    let spec = SweepSpec {
        mu_x: vec![1e-2, 1e-1, 1.0],
        mu_y: vec![1e-2, 1e-1, 1.0],
        eps: 1e-4,
        ..SweepSpec::default()
    };
    let r = scaling_sweep(&spec);
    assert_eq!(r.cells.len(), 9);
    for c in r.cells.iter().filter(|c| c.mu_x == c.mu_y) {
        assert_eq!(c.geometric, c.minimum);
    }
    // iterations depend on µ_x µ_y only
    let k = |a: f64, b: f64| {
        r.cells
            .iter()
            .find(|c| c.mu_x == a && c.mu_y == b)
            .unwrap()
            .iterations
            .unwrap()
    };
    assert_eq!(k(1e-2, 1.0), k(1e-1, 1e-1));
    assert_eq!(k(1e-2, 1.0), k(1.0, 1e-2));
}

#[test]
fn max_iters_cells_are_recorded_and_excluded_from_fits() {
    let spec = SweepSpec {
        mu_x: vec![1e-4, 1.0],
        mu_y: vec![1.0],
        max_iters: 200,
        ..SweepSpec::default()
    };
    let r = scaling_sweep(&spec);
    let slow = &r.cells[0];
    assert_eq!(serde_json::to_value(slow.status).unwrap(), "max_iters");
    assert!(slow.iterations.is_none() && slow.residual_geometric.is_none());
    assert!(r.geometric_fit.is_none());
}

#[test]
fn rate_consistency_has_no_violations() {
    let r = rate_consistency(200, 3).unwrap();
    assert_eq!(r.violations, 0);
    assert!(r.worst_ratio <= 1.0);
}

#[test]
fn stochastic_plan_meets_accuracy_in_the_mean() {
    let p = demo_instance(4, 3).unwrap();
    let spec = StochasticOracleSpec::uniform(1, 0.5, 0.5).unwrap();
    let plan = plan_centralized(&p, &spec, 1e-2, RegimeChoice::Auto, None).unwrap();
    assert!(plan.batch_f > 1 && plan.iterations > 0);
    let runs = centralized_checks(&p, &plan, plan.iterations, &[0, 1, 2, 3, 4]).unwrap();
    assert!(runs.passed(), "{:?}", runs.checks);
}

#[test]
fn bias_plan_uses_model_constants() {
    let p = demo_instance(4, 3).unwrap();
    let plain = plan_centralized(
        &p,
        &StochasticOracleSpec::noiseless(1),
        1e-3,
        RegimeChoice::Auto,
        None,
    )
    .unwrap();
    let biased = plan_centralized(
        &p,
        &StochasticOracleSpec::noiseless(1),
        1e-3,
        RegimeChoice::Auto,
        Some(1e-4),
    )
    .unwrap();
    assert!(biased.params.theta > plain.params.theta);
    let b = biased.bias.unwrap();
    let gap = 1.0 - biased.params.theta;
    assert!((b.floor - 8e-4 / (gap * gap)).abs() <= 1e-12 * b.floor);
    assert!((b.bias_f.norm() - b.norm_f).abs() < 1e-12);
    assert!(plan_centralized(
        &p,
        &StochasticOracleSpec::noiseless(1),
        1e-3,
        RegimeChoice::Auto,
        Some(0.0)
    )
    .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fit_is_invariant_to_shifting_y(a in -5.0f64..5.0, b in -3.0f64..3.0, shift in -10.0f64..10.0, noise in proptest::collection::vec(-0.1f64..0.1, 5)) {
        let pts: Vec<(f64, f64)> = noise.iter().enumerate().map(|(i, e)| (i as f64, a + b * i as f64 + e)).collect();
        let moved: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, p.1 + shift)).collect();
        let f = fit_line(&pts).unwrap();
        let g = fit_line(&moved).unwrap();
        prop_assert!((f.slope - g.slope).abs() < 1e-9);
        prop_assert!((f.intercept + shift - g.intercept).abs() < 1e-9);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f.r2));
    }
}

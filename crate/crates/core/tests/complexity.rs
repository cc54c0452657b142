use apdg_core::apdg::{select_parameters, Regime, RegimeChoice};
use apdg_core::complexity::{
    centralized_distance_bound, predict_decentralized_counts, predict_lower_bound,
    predict_rate_bound,
};
use apdg_core::decentralized::{plan_decentralized, InexactnessBudget};
use apdg_core::network::{certify_contraction, Graph, MixingSchedule};
use apdg_core::problem::{generate, GeneratorSpec, ModelConstants, StochasticOracleSpec};
use proptest::prelude::*;

fn constants(
    mu_x: f64,
    l_x: f64,
    mu_y: f64,
    l_y: f64,
    l_xy: f64,
    mu_xy: f64,
    mu_yx: f64,
) -> ModelConstants<f64> {
    ModelConstants {
        mu_x,
        l_x,
        mu_y,
        l_y,
        l_xy,
        mu_xy,
        mu_yx,
    }
}

#[test]
fn rate_bound_examples() {
    let ones = ModelConstants::<f64>::ones();
    assert_eq!(predict_rate_bound(&ones, Regime::A).unwrap(), 8.0);
    let strong_coupling = constants(1.0, 1.0, 1.0, 1.0, 10.0, 1.0, 1.0);
    assert_eq!(
        predict_rate_bound(&strong_coupling, Regime::A).unwrap(),
        44.0
    );
    let degenerate = constants(0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0);
    assert_eq!(predict_rate_bound(&degenerate, Regime::D).unwrap(), 10.0);
    assert!(predict_rate_bound(&degenerate, Regime::A).is_err());
    assert_eq!(predict_rate_bound(&ones, Regime::B).unwrap(), 12.0);
}

#[test]
fn lower_bound_examples() {
    let e_inv = (-1.0f64).exp();
    let ones = ModelConstants::<f64>::ones();
    assert!((predict_lower_bound(&ones, e_inv) - 3.0).abs() < 1e-12);
    let weak = constants(0.01, 1.0, 0.01, 1.0, 1.0, 1.0, 1.0);
    assert!((predict_lower_bound(&weak, e_inv) - 120.0).abs() < 1e-9);
    let a = predict_lower_bound(&ones, 1e-3);
    let b = predict_lower_bound(&ones, 5e-4);
    assert!((b - a - 3.0 * 2f64.ln()).abs() < 1e-12);
}

fn planned_budget() -> (InexactnessBudget<f64>, f64) {
    let p = generate::<f64>(&GeneratorSpec::new(3, 2, 2, 1.0, 2.0, 1.0, 5)).unwrap();
    let s = MixingSchedule::static_graph(Graph::ring(3).unwrap());
    let c = certify_contraction(&s, 1, 1).unwrap();
    let s = s.with_certificate(c);
    let plan = plan_decentralized(
        &p,
        &s,
        &StochasticOracleSpec::uniform(3, 0.1, 0.1).unwrap(),
        1e-3,
        RegimeChoice::Auto,
    )
    .unwrap();
    (plan.budget, plan.params.theta)
}

#[test]
fn decentralized_count_examples() {
    let (mut b, theta) = planned_budget();
    b.iterations = 50;
    b.rounds = 10;
    b.batch_f = vec![3, 1, 1];
    b.batch_g = vec![2, 1, 4];
    let c = predict_decentralized_counts(&b, theta, 1.0 / b.lambda);
    assert_eq!(c.iterations, 50);
    assert_eq!(c.communications, 500);
    assert_eq!(c.node_oracle_calls, vec![250, 100, 250]);

    b.rounds = 0;
    b.batch_f = vec![1; 3];
    b.batch_g = vec![1; 3];
    let c = predict_decentralized_counts(&b, theta, 1.0);
    assert_eq!(c.communications, 0);
    assert!(c.node_oracle_calls.iter().all(|&k| k == 100));
}

#[test]
fn order_forms_track_the_plan() {
    let (b, theta) = planned_budget();
    let kappa = b.tau as f64 / b.lambda;
    let c = predict_decentralized_counts(&b, theta, kappa);
    let n_order = (3.0 * b.psi0 * b.nu / b.eps).ln() / (1.0 - theta);
    assert!((c.iterations as f64 - n_order).abs() <= 1.0);
    let t_order = kappa * (b.d / b.delta_prime).ln();
    assert!((c.communications_order - n_order * t_order).abs() <= 1e-9 * c.communications_order);
    assert!(c.communications as f64 >= c.communications_order);
}

#[test]
fn distance_bound_at_zero_steps() {
    let ones = ModelConstants::<f64>::ones();
    let p = select_parameters(&ones, RegimeChoice::Fixed(Regime::A)).unwrap();
    let (bx, by) = centralized_distance_bound(&p, 1.0, 6.0, 0.0, 0.0, 0.0, 0);
    assert!((bx - p.omega / 3.0 * 6.0).abs() < 1e-12);
    assert!((by - 6.0 / (4.0 * p.omega)).abs() < 1e-12);
    let (later, _) = centralized_distance_bound(&p, 1.0, 6.0, 0.0, 0.0, 0.0, 10);
    assert!(later < bx);
}

fn tuple() -> impl Strategy<Value = ModelConstants<f64>> {
    (
        0.01f64..1.0,
        1.0f64..10.0,
        0.01f64..1.0,
        1.0f64..10.0,
        0.1f64..5.0,
        0.05f64..1.0,
        0.05f64..1.0,
    )
        .prop_map(|(mx, lx, my, ly, lxy, a, b)| {
            constants(mx * lx, lx, my * ly, ly, lxy, a * lxy, b * lxy)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn selected_theta_respects_the_bound(c in tuple()) {
        for regime in Regime::ALL {
            let p = select_parameters(&c, RegimeChoice::Fixed(regime)).unwrap();
            let bound = predict_rate_bound(&c, regime).unwrap();
            prop_assert!(1.0 / (1.0 - p.theta) <= bound * (1.0 + 1e-12), "{regime}: {} > {bound}", 1.0 / (1.0 - p.theta));
        }
    }

    #[test]
    fn bound_is_monotone(c in tuple(), up in 1.0f64..3.0, which in 0usize..5) {
        let mut d = c;
        match which {
            0 => d.mu_x = (c.mu_x * up).min(c.l_x),
            1 => d.mu_y = (c.mu_y * up).min(c.l_y),
            2 => d.l_x = c.l_x * up,
            3 => d.l_y = c.l_y * up,
            _ => d.l_xy = c.l_xy * up,
        }
        for regime in Regime::ALL {
            let before = predict_rate_bound(&c, regime).unwrap();
            let after = predict_rate_bound(&d, regime).unwrap();
            if which < 2 {
                prop_assert!(after <= before * (1.0 + 1e-12));
            } else {
                prop_assert!(after >= before * (1.0 - 1e-12));
            }
        }
    }
}

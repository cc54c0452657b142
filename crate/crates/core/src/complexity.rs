//! Predictions from theory: explicit iteration bounds per parameter regime,
//! the lower complexity bound, and the counts of a decentralized plan.

use serde::Serialize;

use crate::apdg::{ApdgParameters, Regime};
use crate::decentralized::{planned_iterations, InexactnessBudget};
use crate::error::{Error, Result};
use crate::problem::ModelConstants;
use crate::Scalar;

/// Explicit upper bound on `1/(1−θ)` for the parameters of `regime`.
pub fn predict_rate_bound<T: Scalar>(constants: &ModelConstants<T>, regime: Regime) -> Result<T> {
    if !regime.is_feasible(constants) {
        return Err(Error::Infeasible(format!(
            "regime {regime} is infeasible for these constants"
        )));
    }
    let c = constants;
    let four = T::lit(4.0);
    let eight = T::lit(8.0);
    let max3 = |a: T, b: T, d: T| a.max(b).max(d);
    let lxly = (c.l_x * c.l_y).sqrt();
    Ok(match regime {
        Regime::A => {
            four + four
                * max3(
                    (c.l_x / c.mu_x).sqrt(),
                    (c.l_y / c.mu_y).sqrt(),
                    c.l_xy / (c.mu_x * c.mu_y).sqrt(),
                )
        }
        Regime::B => {
            four + eight
                * max3(
                    lxly / c.mu_xy,
                    c.l_xy / c.mu_xy * (c.l_x / c.mu_x).sqrt(),
                    (c.l_xy / c.mu_xy).powi(2),
                )
        }
        Regime::C => {
            four + eight
                * max3(
                    lxly / c.mu_yx,
                    c.l_xy / c.mu_yx * (c.l_y / c.mu_y).sqrt(),
                    (c.l_xy / c.mu_yx).powi(2),
                )
        }
        Regime::D => {
            T::lit(2.0)
                + eight
                    * max3(
                        lxly * c.l_xy / (c.mu_xy * c.mu_yx),
                        (c.l_xy / c.mu_yx).powi(2),
                        (c.l_xy / c.mu_xy).powi(2),
                    )
        }
    })
}

/// `(√(L_x/µ_x) + √(λ_max(AᵀA)/(µ_xµ_y)) + √(L_y/µ_y))·ln(1/ε)` with
/// `λ_max(AᵀA) = L_xy²`.
pub fn predict_lower_bound<T: Scalar>(constants: &ModelConstants<T>, eps: T) -> T {
    let c = constants;
    ((c.l_x / c.mu_x).sqrt() + c.l_xy / (c.mu_x * c.mu_y).sqrt() + (c.l_y / c.mu_y).sqrt())
        * (T::one() / eps).ln()
}

/// Iterations after which the deterministic part `θᵏΨ⁰` of the bound falls
/// below `eps/(3ν)`.
pub fn predict_iterations<T: Scalar>(
    params: &ApdgParameters<T>,
    l_xy: T,
    psi0: T,
    eps: T,
) -> usize {
    planned_iterations(params.theta, psi0, params.nu(l_xy), eps)
}

/// Right-hand sides of the expected-distance bounds after `k` steps:
/// `(ω/(3L_xy))·B` for x and `(1/(4L_xyω))·B` for y with
/// `B = θᵏΨ⁰ + 4(δ_x+δ_y)/(1−θ)² + Σ²/(2(1−θ))`.
pub fn centralized_distance_bound<T: Scalar>(
    params: &ApdgParameters<T>,
    l_xy: T,
    psi0: T,
    delta_x: T,
    delta_y: T,
    sigma2: T,
    k: usize,
) -> (T, T) {
    let one = T::one();
    let gap = one - params.theta;
    let b = params.theta.powi(k as i32) * psi0
        + T::lit(4.0) * (delta_x + delta_y) / (gap * gap)
        + sigma2 / (T::lit(2.0) * gap);
    (
        params.omega / (T::lit(3.0) * l_xy) * b,
        one / (T::lit(4.0) * l_xy * params.omega) * b,
    )
}

/// `Σ² = (1/(2L_x) + ω/L_xy)·σ_f²/r_f + (1/(2L_y) + 1/(L_xyω))·σ_g²/r_g`.
pub fn centralized_noise_term<T: Scalar>(
    constants: &ModelConstants<T>,
    omega: T,
    sigma_f2: T,
    sigma_g2: T,
    batch_f: usize,
    batch_g: usize,
) -> T {
    let one = T::one();
    let half = T::lit(0.5);
    (half / constants.l_x + omega / constants.l_xy) * sigma_f2 / T::count(batch_f.max(1))
        + (half / constants.l_y + one / (constants.l_xy * omega)) * sigma_g2
            / T::count(batch_g.max(1))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecentralizedCounts {
    pub iterations: usize,
    pub communications: u64,
    pub node_oracle_calls: Vec<u64>,
    /// `κ = τ/λ`.
    pub kappa: f64,
    /// `(1/(1−θ))·κ·ln(3Ψ⁰ν/ε)·ln(D/δ′)`.
    pub communications_order: f64,
    /// `(1/(1−θ))·ln(3Ψ⁰ν/ε)·(r_{f,i} + r_{g,i})` per node.
    pub oracle_order: Vec<f64>,
}

/// `N`, `N·T` and `N·(r_{f,i} + r_{g,i})` of a planned budget, with the
/// unrounded order-of-magnitude forms alongside.
pub fn predict_decentralized_counts<T: Scalar>(
    budget: &InexactnessBudget<T>,
    theta: T,
    kappa: T,
) -> DecentralizedCounts {
    let n = budget.iterations;
    let per_iteration = T::one() / (T::one() - theta);
    let log_eps = if budget.psi0 > T::zero() {
        (T::lit(3.0) * budget.psi0 * budget.nu / budget.eps)
            .ln()
            .max(T::zero())
    } else {
        T::zero()
    };
    let log_consensus = (budget.d / budget.delta_prime).ln().max(T::zero());
    let outer = (per_iteration * log_eps).as_f64();
    DecentralizedCounts {
        iterations: n,
        communications: n as u64 * budget.rounds as u64,
        node_oracle_calls: budget
            .batch_f
            .iter()
            .zip(&budget.batch_g)
            .map(|(f, g)| n as u64 * (f + g) as u64)
            .collect(),
        kappa: kappa.as_f64(),
        communications_order: outer * (kappa * log_consensus).as_f64(),
        oracle_order: budget
            .batch_f
            .iter()
            .zip(&budget.batch_g)
            .map(|(f, g)| outer * (f + g) as f64)
            .collect(),
    }
}

use serde::{Deserialize, Serialize};

use super::{apdg_step, lyapunov, ApdgParameters, GradientOracle, SolverState};
use crate::error::{Error, Result};
use crate::problem::{GroundTruth, ModelConstants, SaddlePointProblem};
use crate::Scalar;

/// Runs stop after `max_iters` steps or once both squared distances to the
/// saddle point are at most `target_eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule<T> {
    pub max_iters: usize,
    pub target_eps: Option<T>,
}

impl<T> StopRule<T> {
    pub fn iterations(max_iters: usize) -> Self {
        Self {
            max_iters,
            target_eps: None,
        }
    }
}

/// Ψ above this multiple of Ψ⁰ aborts the run.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub dist_x2: f64,
    pub dist_y2: f64,
    pub psi: f64,
    pub f_calls: u64,
    pub g_calls: u64,
    pub f_samples: u64,
    pub g_samples: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace<T: Scalar> {
    pub records: Vec<TraceRecord>,
    pub final_state: SolverState<T>,
    pub reached_target: bool,
    pub psi0: T,
}

impl<T: Scalar> Trace<T> {
    pub fn last(&self) -> &TraceRecord {
        self.records
            .last()
            .expect("a trace always holds the initial record")
    }
}

/// Iterates from `initial` and records distances, Ψ and oracle counters
/// before the first step and after every step.
pub fn run<T: Scalar, O: GradientOracle<T> + ?Sized>(
    problem: &SaddlePointProblem<T>,
    params: &ApdgParameters<T>,
    truth: &GroundTruth<T>,
    initial: SolverState<T>,
    oracle: &mut O,
    stop: StopRule<T>,
) -> Result<Trace<T>> {
    let (rf, rg) = oracle.batch_sizes();
    let a = problem.coupling();
    let mut state = initial;
    let psi0 = lyapunov(&state, params, truth, problem)?.psi;
    let limit = psi0 * T::lit(DIVERGENCE_FACTOR);
    let mut records = Vec::with_capacity(stop.max_iters.min(1 << 16) + 1);
    let mut calls = 0u64;
    loop {
        let dx2 = (&state.x - &truth.x_star).norm_squared();
        let dy2 = (&state.y - &truth.y_star).norm_squared();
        let psi = lyapunov(&state, params, truth, problem)?.psi;
        records.push(TraceRecord {
            k: state.k,
            dist_x2: dx2.as_f64(),
            dist_y2: dy2.as_f64(),
            psi: psi.as_f64(),
            f_calls: calls,
            g_calls: calls,
            f_samples: calls * rf as u64,
            g_samples: calls * rg as u64,
        });
        if psi0 > T::zero() && psi > limit {
            return Err(Error::Divergence {
                iteration: state.k,
                psi: psi.as_f64(),
                limit: limit.as_f64(),
            });
        }
        let reached = stop.target_eps.is_some_and(|eps| dx2.max(dy2) <= eps);
        if reached || records.len() > stop.max_iters {
            return Ok(Trace {
                records,
                final_state: state,
                reached_target: reached,
                psi0,
            });
        }
        state = apdg_step(&state, params, oracle, a)?;
        calls += 1;
    }
}

/// Batch sizes that keep the stochastic error term of the final bound below
/// `eps`:
/// `r_f = ⌈max{ω, ω⁻¹}/(2L_xy(1−θ)ε) · (1/L_x + ω/L_xy) σ_f²⌉`, and the
/// analogue with `(1/L_y + 1/(L_xy ω)) σ_g²`, both at least 1.
pub fn compute_batch_sizes<T: Scalar>(
    constants: &ModelConstants<T>,
    omega: T,
    theta: T,
    eps: T,
    sigma_f2: T,
    sigma_g2: T,
) -> Result<(usize, usize)> {
    if !(eps > T::zero()) || !(theta > T::zero() && theta < T::one()) {
        return Err(Error::InvalidArgument(format!(
            "batch sizes need eps > 0 and theta in (0, 1) (eps = {eps}, theta = {theta})"
        )));
    }
    let one = T::one();
    let lead = omega.max(one / omega) / (T::lit(2.0) * constants.l_xy * (one - theta) * eps);
    let rf = lead * (one / constants.l_x + omega / constants.l_xy) * sigma_f2;
    let rg = lead * (one / constants.l_y + one / (constants.l_xy * omega)) * sigma_g2;
    Ok((ceil_batch(rf), ceil_batch(rg)))
}

pub(crate) fn ceil_batch<T: Scalar>(v: T) -> usize {
    let c = v.as_f64().ceil();
    if c.is_nan() || c < 1.0 {
        1
    } else if c >= usize::MAX as f64 {
        usize::MAX
    } else {
        c as usize
    }
}

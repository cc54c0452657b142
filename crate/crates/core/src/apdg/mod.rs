//! Centralized accelerated primal-dual gradient method with inexact,
//! stochastic oracles.

mod oracle;
mod params;
mod run;
mod state;

pub use oracle::{
    bias_model_delta, bias_norm_for_delta, BiasedOracle, ExactOracle, StochasticOracle,
};
pub use params::{select_parameters, ApdgParameters, Regime, RegimeChoice};
pub use run::{compute_batch_sizes, run, StopRule, Trace, TraceRecord, DIVERGENCE_FACTOR};
pub use state::{apdg_step, lyapunov, GradientOracle, LyapunovReport, SolverState};

pub(crate) use run::ceil_batch;
pub(crate) use state::{convex_mix, dual_update, extrapolate, follow, primal_update};

//! Decentralized method: every node keeps its own column of the iterate
//! matrices, queries only its local functions, and the columns are pulled
//! together by a fixed number of gossip rounds after each primal and dual
//! update.

mod budget;
mod run;

use nalgebra::{DMatrix, DVector};

use crate::apdg::{
    convex_mix, dual_update, extrapolate, follow, primal_update, ApdgParameters, SolverState,
};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{column_mean, consensus_error, replicate};
use crate::network::{consensus, MixingSchedule};
use crate::problem::oracle::add_batched_noise;
use crate::problem::{SaddlePointProblem, StochasticOracleSpec};
use crate::rng::{SeedStreams, StreamId, Variable};
use crate::Scalar;

pub use budget::{plan_budget, planned_iterations, InexactnessBudget};
pub use run::{
    execute, plan_decentralized, run_decentralized, DecentralizedOptions, DecentralizedPlan,
    DecentralizedRecord, DecentralizedTrace,
};

/// Per-node iterates, one column per node.
#[derive(Debug, Clone, PartialEq)]
pub struct DecentralizedState<T: Scalar> {
    pub x: DMatrix<T>,
    pub x_f: DMatrix<T>,
    pub y: DMatrix<T>,
    pub y_f: DMatrix<T>,
    pub y_prev: DMatrix<T>,
    pub k: usize,
    /// `‖X − X̄‖` after the last consensus step.
    pub consensus_error_x: T,
    pub consensus_error_y: T,
}

impl<T: Scalar> DecentralizedState<T> {
    /// Every node starts at `(x0, y0)`.
    pub fn replicated(x0: &DVector<T>, y0: &DVector<T>, n: usize) -> Self {
        let x = replicate(x0, n);
        let y = replicate(y0, n);
        Self {
            x_f: x.clone(),
            x,
            y_f: y.clone(),
            y_prev: y.clone(),
            y,
            k: 0,
            consensus_error_x: T::zero(),
            consensus_error_y: T::zero(),
        }
    }

    pub fn zeros(dim_x: usize, dim_y: usize, n: usize) -> Self {
        Self::replicated(&DVector::zeros(dim_x), &DVector::zeros(dim_y), n)
    }

    pub fn n(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_finite(&self) -> bool {
        [&self.x, &self.x_f, &self.y, &self.y_f, &self.y_prev]
            .iter()
            .all(|m| m.iter().all(|v| v.is_finite_value()))
    }

    fn check(&self, problem: &SaddlePointProblem<T>) -> Result<()> {
        let n = problem.n();
        for (what, m, rows) in [
            ("X", &self.x, problem.dim_x()),
            ("X_f", &self.x_f, problem.dim_x()),
            ("Y", &self.y, problem.dim_y()),
            ("Y_f", &self.y_f, problem.dim_y()),
            ("Y_prev", &self.y_prev, problem.dim_y()),
        ] {
            check_dim(what, rows, m.nrows())?;
            check_dim(what, n, m.ncols())?;
        }
        Ok(())
    }
}

/// Column means `(x̄, ȳ, x̄_f, ȳ_f, ȳ_prev)` as a centralized state.
pub fn average_view<T: Scalar>(state: &DecentralizedState<T>) -> SolverState<T> {
    SolverState {
        x: column_mean(&state.x),
        y: column_mean(&state.y),
        x_f: column_mean(&state.x_f),
        y_f: column_mean(&state.y_f),
        y_prev: column_mean(&state.y_prev),
        k: state.k,
    }
}

/// What one step looked like from the network's point of view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics<T> {
    /// `‖U − Ū‖` before consensus.
    pub spread_u: T,
    /// `‖W − W̄‖` before consensus.
    pub spread_w: T,
    /// `‖X⁺ − X̄⁺‖` after consensus.
    pub consensus_error_x: T,
    pub consensus_error_y: T,
    /// Gossip rounds spent; the X and Y blocks travel in the same round.
    pub rounds: usize,
}

/// Query points `Y_m`, `X_g`, `Y_g`, column by column.
pub fn decentralized_query_points<T: Scalar>(
    state: &DecentralizedState<T>,
    params: &ApdgParameters<T>,
) -> (DMatrix<T>, DMatrix<T>, DMatrix<T>) {
    let n = state.n();
    let mut y_m = DMatrix::zeros(state.y.nrows(), n);
    let mut x_g = DMatrix::zeros(state.x.nrows(), n);
    let mut y_g = DMatrix::zeros(state.y.nrows(), n);
    for i in 0..n {
        let x = state.x.column(i).into_owned();
        let y = state.y.column(i).into_owned();
        y_m.set_column(
            i,
            &extrapolate(&y, &state.y_prev.column(i).into_owned(), params.theta),
        );
        x_g.set_column(
            i,
            &convex_mix(params.tau_x, &x, &state.x_f.column(i).into_owned()),
        );
        y_g.set_column(
            i,
            &convex_mix(params.tau_y, &y, &state.y_f.column(i).into_owned()),
        );
    }
    (y_m, x_g, y_g)
}

/// Batched local gradients `∇F(X_g)` and `∇G(Y_g)` of iteration `k`. Node `i`
/// draws from streams `(i, X, k)` and `(i, Y, k)`.
#[allow(clippy::too_many_arguments)]
pub fn node_gradients<T: Scalar>(
    problem: &SaddlePointProblem<T>,
    spec: &StochasticOracleSpec<T>,
    streams: &SeedStreams,
    batch_f: &[usize],
    batch_g: &[usize],
    x_g: &DMatrix<T>,
    y_g: &DMatrix<T>,
    k: usize,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let n = problem.n();
    check_dim("variance list", n, spec.n())?;
    check_dim("f batch sizes", n, batch_f.len())?;
    check_dim("g batch sizes", n, batch_g.len())?;
    let exact_f = problem.stacked_gradient_f(x_g)?;
    let exact_g = problem.stacked_gradient_g(y_g)?;
    let mut grad_f = DMatrix::zeros(exact_f.nrows(), n);
    let mut grad_g = DMatrix::zeros(exact_g.nrows(), n);
    for i in 0..n {
        let mut rng = streams.stream(StreamId::new(i, Variable::X, k));
        let g = add_batched_noise(
            exact_f.column(i).into_owned(),
            spec.node_sigma_f2(i),
            batch_f[i].max(1),
            &mut rng,
        );
        grad_f.set_column(i, &g);
        let mut rng = streams.stream(StreamId::new(i, Variable::Y, k));
        let g = add_batched_noise(
            exact_g.column(i).into_owned(),
            spec.node_sigma_g2(i),
            batch_g[i].max(1),
            &mut rng,
        );
        grad_g.set_column(i, &g);
    }
    Ok((grad_f, grad_g))
}

/// One iteration. Consensus of iteration `k` uses mixing matrices
/// `k·T .. (k+1)·T` of the schedule for both the primal and the dual block.
pub fn decentralized_step<T: Scalar>(
    state: &DecentralizedState<T>,
    params: &ApdgParameters<T>,
    budget: &InexactnessBudget<T>,
    problem: &SaddlePointProblem<T>,
    schedule: &MixingSchedule<T>,
    spec: &StochasticOracleSpec<T>,
    streams: &SeedStreams,
) -> Result<(DecentralizedState<T>, StepDiagnostics<T>)> {
    state.check(problem)?;
    check_dim("schedule nodes", problem.n(), schedule.n())?;
    let a = problem.coupling();
    let n = problem.n();
    let k = state.k;
    let (y_m, x_g, y_g) = decentralized_query_points(state, params);
    let (grad_f, grad_g) = node_gradients(
        problem,
        spec,
        streams,
        &budget.batch_f,
        &budget.batch_g,
        &x_g,
        &y_g,
        k,
    )?;

    let mut u = DMatrix::zeros(problem.dim_x(), n);
    let mut w = DMatrix::zeros(problem.dim_y(), n);
    for i in 0..n {
        let gf = grad_f.column(i).into_owned();
        let gg = grad_g.column(i).into_owned();
        let ui = primal_update(
            params,
            a,
            &state.x.column(i).into_owned(),
            &x_g.column(i).into_owned(),
            &y_m.column(i).into_owned(),
            &gf,
            &gg,
        );
        let wi = dual_update(
            params,
            a,
            &state.y.column(i).into_owned(),
            &y_g.column(i).into_owned(),
            &ui,
            &gf,
            &gg,
        );
        u.set_column(i, &ui);
        w.set_column(i, &wi);
    }
    let spread_u = consensus_error(&u);
    let spread_w = consensus_error(&w);

    let start = k * budget.rounds;
    let x = consensus(&u, schedule, start, budget.rounds)?;
    let y = consensus(&w, schedule, start, budget.rounds)?;

    let mut x_f = DMatrix::zeros(problem.dim_x(), n);
    let mut y_f = DMatrix::zeros(problem.dim_y(), n);
    for i in 0..n {
        x_f.set_column(
            i,
            &follow(
                &x_g.column(i).into_owned(),
                params.sigma_x,
                &x.column(i).into_owned(),
                &state.x.column(i).into_owned(),
            ),
        );
        y_f.set_column(
            i,
            &follow(
                &y_g.column(i).into_owned(),
                params.sigma_y,
                &y.column(i).into_owned(),
                &state.y.column(i).into_owned(),
            ),
        );
    }
    let consensus_error_x = consensus_error(&x);
    let consensus_error_y = consensus_error(&y);
    let next = DecentralizedState {
        x,
        x_f,
        y,
        y_f,
        y_prev: state.y.clone(),
        k: k + 1,
        consensus_error_x,
        consensus_error_y,
    };
    if !next.is_finite() {
        return Err(Error::NonFinite("decentralized iterate"));
    }
    let worst = consensus_error_x.max(consensus_error_y);
    let limit = budget.violation_limit();
    if worst > limit {
        return Err(Error::BudgetViolated {
            iteration: k,
            spread: worst.as_f64(),
            limit: limit.as_f64(),
        });
    }
    Ok((
        next,
        StepDiagnostics {
            spread_u,
            spread_w,
            consensus_error_x,
            consensus_error_y,
            rounds: budget.rounds,
        },
    ))
}

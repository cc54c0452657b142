use serde::Serialize;

use super::{average_view, decentralized_step, plan_budget, DecentralizedState, InexactnessBudget};
use crate::apdg::{lyapunov, select_parameters, ApdgParameters, RegimeChoice, DIVERGENCE_FACTOR};
use crate::error::{Error, Result};
use crate::network::MixingSchedule;
use crate::problem::{solve_ground_truth, GroundTruth, SaddlePointProblem, StochasticOracleSpec};
use crate::rng::SeedStreams;
use crate::Scalar;

/// Parameters, ground truth and budget of a decentralized run, all fixed
/// before the first step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecentralizedPlan<T: Scalar> {
    pub params: ApdgParameters<T>,
    #[serde(skip)]
    pub truth: GroundTruth<T>,
    pub budget: InexactnessBudget<T>,
}

/// Selects parameters from the hatted constants and plans the budget for a
/// start at the origin.
pub fn plan_decentralized<T: Scalar>(
    problem: &SaddlePointProblem<T>,
    schedule: &MixingSchedule<T>,
    spec: &StochasticOracleSpec<T>,
    eps: T,
    regime: RegimeChoice,
) -> Result<DecentralizedPlan<T>> {
    let truth = solve_ground_truth(problem)?;
    let params = select_parameters(&problem.model_constants()?.hatted(), regime)?;
    let start = DecentralizedState::zeros(problem.dim_x(), problem.dim_y(), problem.n());
    let psi0 = lyapunov(&average_view(&start), &params, &truth, problem)?.psi;
    let budget = plan_budget(problem, &truth, spec, &params, eps, schedule, psi0)?;
    Ok(DecentralizedPlan {
        params,
        truth,
        budget,
    })
}

/// Overrides for experiments; `None` keeps the planned value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecentralizedOptions {
    pub iterations: Option<usize>,
    pub rounds: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecentralizedRecord {
    pub k: usize,
    /// `‖x̄ − x*‖²`.
    pub dist_x2: f64,
    pub dist_y2: f64,
    /// Ψ of the averaged iterates.
    pub psi: f64,
    pub spread_u: f64,
    pub spread_w: f64,
    pub consensus_error_x: f64,
    pub consensus_error_y: f64,
    pub communications: u64,
    /// Stochastic gradient samples summed over nodes.
    pub oracle_samples: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecentralizedTrace<T: Scalar> {
    pub records: Vec<DecentralizedRecord>,
    pub final_state: DecentralizedState<T>,
    pub plan: DecentralizedPlan<T>,
    pub communications: u64,
    /// Samples drawn by each node, f and g together.
    pub node_oracle_calls: Vec<u64>,
}

impl<T: Scalar> DecentralizedTrace<T> {
    pub fn last(&self) -> &DecentralizedRecord {
        self.records
            .last()
            .expect("a trace always holds the initial record")
    }

    /// `max{‖x̄ᴺ − x*‖², ‖ȳᴺ − y*‖²}`.
    pub fn final_criterion(&self) -> f64 {
        let r = self.last();
        r.dist_x2.max(r.dist_y2)
    }
}

/// Plans the run and executes it from the origin.
pub fn run_decentralized<T: Scalar>(
    problem: &SaddlePointProblem<T>,
    schedule: &MixingSchedule<T>,
    spec: &StochasticOracleSpec<T>,
    eps: T,
    regime: RegimeChoice,
    seed: u64,
    options: DecentralizedOptions,
) -> Result<DecentralizedTrace<T>> {
    let mut plan = plan_decentralized(problem, schedule, spec, eps, regime)?;
    if let Some(t) = options.rounds {
        plan.budget.rounds = t;
    }
    if let Some(n) = options.iterations {
        plan.budget.iterations = n;
    }
    execute(problem, schedule, spec, plan, seed)
}

/// Runs a prepared plan from the origin for `plan.budget.iterations` steps.
pub fn execute<T: Scalar>(
    problem: &SaddlePointProblem<T>,
    schedule: &MixingSchedule<T>,
    spec: &StochasticOracleSpec<T>,
    plan: DecentralizedPlan<T>,
    seed: u64,
) -> Result<DecentralizedTrace<T>> {
    let streams = SeedStreams::new(seed);
    let DecentralizedPlan {
        params,
        truth,
        budget,
    } = &plan;
    let n = problem.n();
    let per_node: Vec<u64> = (0..n)
        .map(|i| (budget.batch_f[i] + budget.batch_g[i]) as u64)
        .collect();
    let per_step: u64 = per_node.iter().sum();
    let limit = budget.psi0 * T::lit(DIVERGENCE_FACTOR);

    let mut state = DecentralizedState::zeros(problem.dim_x(), problem.dim_y(), n);
    let mut records = Vec::with_capacity(budget.iterations.min(1 << 16) + 1);
    let mut diag = None;
    let mut steps = 0u64;
    loop {
        let avg = average_view(&state);
        let psi = lyapunov(&avg, params, truth, problem)?.psi;
        let (spread_u, spread_w) = diag.map_or((0.0, 0.0), |d: super::StepDiagnostics<T>| {
            (d.spread_u.as_f64(), d.spread_w.as_f64())
        });
        records.push(DecentralizedRecord {
            k: state.k,
            dist_x2: (&avg.x - &truth.x_star).norm_squared().as_f64(),
            dist_y2: (&avg.y - &truth.y_star).norm_squared().as_f64(),
            psi: psi.as_f64(),
            spread_u,
            spread_w,
            consensus_error_x: state.consensus_error_x.as_f64(),
            consensus_error_y: state.consensus_error_y.as_f64(),
            communications: steps * budget.rounds as u64,
            oracle_samples: steps * per_step,
        });
        if budget.psi0 > T::zero() && psi > limit {
            return Err(Error::Divergence {
                iteration: state.k,
                psi: psi.as_f64(),
                limit: limit.as_f64(),
            });
        }
        if state.k >= budget.iterations {
            break;
        }
        let (next, d) =
            decentralized_step(&state, params, budget, problem, schedule, spec, &streams)?;
        state = next;
        diag = Some(d);
        steps += 1;
    }
    Ok(DecentralizedTrace {
        records,
        final_state: state,
        communications: steps * plan.budget.rounds as u64,
        node_oracle_calls: per_node.iter().map(|c| c * steps).collect(),
        plan,
    })
}

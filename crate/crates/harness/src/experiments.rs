//! Experiment drivers shared by the CLI and the acceptance suite.

use anyhow::{bail, Result};
use apdg_core::apdg::{
    bias_norm_for_delta, compute_batch_sizes, lyapunov, run, select_parameters, BiasedOracle,
    ExactOracle, GradientOracle, Regime, RegimeChoice, SolverState, StochasticOracle, StopRule,
    Trace,
};
use apdg_core::complexity::{
    centralized_distance_bound, centralized_noise_term, predict_decentralized_counts,
    predict_iterations, predict_lower_bound, predict_rate_bound, DecentralizedCounts,
};
use apdg_core::decentralized::{
    execute, plan_decentralized, DecentralizedPlan, DecentralizedTrace,
};
use apdg_core::problem::LocalPair;
use apdg_core::problem::{
    solve_ground_truth, GeneratorSpec, ModelConstants, SaddlePointProblem, StochasticOracleSpec,
};
use apdg_core::rng::SeedStreams;
use apdg_core::{Error, Parameters, Problem, Quadratic, Schedule, Truth};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A measured quantity against its limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            limit,
            passed: measured <= limit,
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            limit,
            passed: measured >= limit,
        }
    }
}

/// Constant gradient errors injected into a centralized run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasPlan {
    pub delta: f64,
    pub norm_f: f64,
    pub norm_g: f64,
    #[serde(skip)]
    pub bias_f: DVector<f64>,
    #[serde(skip)]
    pub bias_g: DVector<f64>,
    /// `4(δ_x + δ_y)/(1−θ)²`.
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralizedPlan {
    #[serde(skip)]
    pub truth: Truth,
    pub params: Parameters,
    pub constants: ModelConstants<f64>,
    pub sigma_f2: f64,
    pub sigma_g2: f64,
    pub batch_f: usize,
    pub batch_g: usize,
    pub sigma2: f64,
    pub psi0: f64,
    pub iterations: usize,
    pub eps: f64,
    pub bias: Option<BiasPlan>,
}

impl CentralizedPlan {
    pub fn noiseless(&self) -> bool {
        self.sigma_f2 == 0.0 && self.sigma_g2 == 0.0 && self.bias.is_none()
    }

    /// Predicted bounds on `E‖x − x*‖²` and `E‖y − y*‖²` after `k` steps.
    pub fn distance_bounds(&self, k: usize) -> (f64, f64) {
        let (dx, dy) = self
            .bias
            .as_ref()
            .map_or((0.0, 0.0), |b| (b.delta, b.delta));
        centralized_distance_bound(
            &self.params,
            self.constants.l_xy,
            self.psi0,
            dx,
            dy,
            self.sigma2,
            k,
        )
    }
}

fn unit_direction(d: usize, rng: &mut impl Rng) -> DVector<f64> {
    let v = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
    let n = v.norm();
    v / n
}

/// Selects parameters, batch sizes and the iteration count of a centralized
/// run from the origin. With `bias_delta` the parameters come from the
/// constants of the biased model (`2L`, `µ/2`).
pub fn plan_centralized(
    problem: &Problem,
    spec: &StochasticOracleSpec<f64>,
    eps: f64,
    regime: RegimeChoice,
    bias_delta: Option<f64>,
) -> Result<CentralizedPlan> {
    let truth = solve_ground_truth(problem)?;
    let constants = problem.model_constants()?;
    let selected = if bias_delta.is_some() {
        constants.hatted()
    } else {
        constants
    };
    let params = select_parameters(&selected, regime)?;
    let sigma_f2 = spec.global_sigma_f2();
    let sigma_g2 = spec.global_sigma_g2();
    let (batch_f, batch_g) = if sigma_f2 == 0.0 && sigma_g2 == 0.0 {
        (1, 1)
    } else {
        compute_batch_sizes(
            &constants,
            params.omega,
            params.theta,
            eps,
            sigma_f2,
            sigma_g2,
        )?
    };
    let sigma2 = centralized_noise_term(
        &constants,
        params.omega,
        sigma_f2,
        sigma_g2,
        batch_f,
        batch_g,
    );
    let start = SolverState::zeros(problem.dim_x(), problem.dim_y());
    let psi0 = lyapunov(&start, &params, &truth, problem)?.psi;
    let iterations = predict_iterations(&params, constants.l_xy, psi0, eps);
    let bias = match bias_delta {
        None => None,
        Some(delta) => {
            if !(delta > 0.0) {
                bail!("bias delta must be positive, got {delta}");
            }
            let g = problem.global_constants();
            let mut rng = SeedStreams::new(0).auxiliary(1);
            let norm_f = bias_norm_for_delta(delta, g.mu_x, g.l_x);
            let norm_g = bias_norm_for_delta(delta, g.mu_y, g.l_y);
            let gap = 1.0 - params.theta;
            Some(BiasPlan {
                delta,
                norm_f,
                norm_g,
                bias_f: unit_direction(problem.dim_x(), &mut rng) * norm_f,
                bias_g: unit_direction(problem.dim_y(), &mut rng) * norm_g,
                floor: 4.0 * 2.0 * delta / (gap * gap),
            })
        }
    };
    Ok(CentralizedPlan {
        truth,
        params,
        constants,
        sigma_f2,
        sigma_g2,
        batch_f,
        batch_g,
        sigma2,
        psi0,
        iterations,
        eps,
        bias,
    })
}

fn drive<O: GradientOracle<f64>>(
    problem: &Problem,
    plan: &CentralizedPlan,
    oracle: O,
    stop: StopRule<f64>,
) -> Result<Trace<f64>> {
    let start = SolverState::zeros(problem.dim_x(), problem.dim_y());
    Ok(match &plan.bias {
        Some(b) => run(
            problem,
            &plan.params,
            &plan.truth,
            start,
            &mut BiasedOracle::new(oracle, b.bias_f.clone(), b.bias_g.clone()),
            stop,
        )?,
        None => {
            let mut oracle = oracle;
            run(problem, &plan.params, &plan.truth, start, &mut oracle, stop)?
        }
    })
}

/// One centralized run of `iterations` steps from the origin.
pub fn run_centralized(
    problem: &Problem,
    plan: &CentralizedPlan,
    iterations: usize,
    seed: u64,
) -> Result<Trace<f64>> {
    let stop = StopRule::iterations(iterations);
    if plan.sigma_f2 == 0.0 && plan.sigma_g2 == 0.0 {
        drive(problem, plan, ExactOracle::new(problem), stop)
    } else {
        let oracle = StochasticOracle::new(
            problem,
            plan.sigma_f2,
            plan.sigma_g2,
            seed,
            plan.batch_f,
            plan.batch_g,
        );
        drive(problem, plan, oracle, stop)
    }
}

/// Largest `(Ψᵏ⁺¹ − θΨᵏ)/Ψ⁰` along a trace.
pub fn contraction_excess(trace: &Trace<f64>, theta: f64) -> f64 {
    let psi0 = trace.psi0.max(f64::MIN_POSITIVE);
    trace
        .records
        .windows(2)
        .map(|w| (w[1].psi - theta * w[0].psi) / psi0)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest Ψ over the last `window` records.
pub fn plateau(trace: &Trace<f64>, window: usize) -> f64 {
    let r = &trace.records;
    r[r.len().saturating_sub(window)..]
        .iter()
        .map(|r| r.psi)
        .fold(0.0, f64::max)
}

/// Traces, per-seed outcomes and checks of a multi-seed run.
#[derive(Debug, Clone)]
pub struct SeedRuns<T, O> {
    pub traces: Vec<T>,
    pub outcomes: Vec<O>,
    pub checks: Vec<Check>,
}

impl<T, O> SeedRuns<T, O> {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralizedOutcome {
    pub seed: u64,
    pub final_dist_x2: f64,
    pub final_dist_y2: f64,
    pub criterion: f64,
    pub contraction_excess: f64,
    pub plateau: f64,
}

/// Runs every seed in parallel and derives the checks that apply to the plan:
/// Ψ-contraction when noiseless, the bias plateau when biased, and the mean
/// ε-criterion and distance bounds when noisy.
pub fn centralized_checks(
    problem: &Problem,
    plan: &CentralizedPlan,
    iterations: usize,
    seeds: &[u64],
) -> Result<SeedRuns<Trace<f64>, CentralizedOutcome>> {
    let traces: Vec<Trace<f64>> = seeds
        .par_iter()
        .map(|&s| run_centralized(problem, plan, iterations, s))
        .collect::<Result<_>>()?;
    let window = 100.min(iterations / 20).max(1);
    let outcomes: Vec<CentralizedOutcome> = traces
        .iter()
        .zip(seeds)
        .map(|(t, &seed)| {
            let last = t.last();
            CentralizedOutcome {
                seed,
                final_dist_x2: last.dist_x2,
                final_dist_y2: last.dist_y2,
                criterion: last.dist_x2.max(last.dist_y2),
                contraction_excess: contraction_excess(t, plan.params.theta),
                plateau: plateau(t, window),
            }
        })
        .collect();
    let m = outcomes.len() as f64;
    let mut checks = Vec::new();
    if plan.noiseless() {
        let worst = outcomes
            .iter()
            .map(|o| o.contraction_excess)
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::at_most("psi contraction excess", worst, 1e-9));
    } else if let Some(b) = &plan.bias {
        let worst = outcomes.iter().map(|o| o.plateau).fold(0.0, f64::max);
        checks.push(Check::at_most("bias plateau", worst, 1.1 * b.floor));
    } else {
        let mean = outcomes.iter().map(|o| o.criterion).sum::<f64>() / m;
        checks.push(Check::at_most("mean final criterion", mean, plan.eps));
        let (bx, by) = plan.distance_bounds(iterations);
        let mx = outcomes.iter().map(|o| o.final_dist_x2).sum::<f64>() / m;
        let my = outcomes.iter().map(|o| o.final_dist_y2).sum::<f64>() / m;
        checks.push(Check::at_most("mean final x distance vs bound", mx, bx));
        checks.push(Check::at_most("mean final y distance vs bound", my, by));
    }
    Ok(SeedRuns {
        traces,
        outcomes,
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecentralizedOutcome {
    pub seed: u64,
    pub criterion: f64,
    pub max_consensus_error: f64,
    pub max_spread: f64,
}

/// Runs every seed of a decentralized plan in parallel and checks the mean
/// ε-criterion, the seed-mean consensus error after every projection, the
/// seed-mean pre-consensus spread and the final distance bounds (factor 2).
pub fn decentralized_checks(
    problem: &Problem,
    schedule: &Schedule,
    spec: &StochasticOracleSpec<f64>,
    plan: &DecentralizedPlan<f64>,
    seeds: &[u64],
) -> Result<SeedRuns<DecentralizedTrace<f64>, DecentralizedOutcome>> {
    let traces: Vec<DecentralizedTrace<f64>> = seeds
        .par_iter()
        .map(|&s| Ok(execute(problem, schedule, spec, plan.clone(), s)?))
        .collect::<Result<_>>()?;
    let outcomes: Vec<DecentralizedOutcome> = traces
        .iter()
        .zip(seeds)
        .map(|(t, &seed)| DecentralizedOutcome {
            seed,
            criterion: t.final_criterion(),
            max_consensus_error: t
                .records
                .iter()
                .map(|r| r.consensus_error_x.max(r.consensus_error_y))
                .fold(0.0, f64::max),
            max_spread: t
                .records
                .iter()
                .map(|r| r.spread_u.max(r.spread_w))
                .fold(0.0, f64::max),
        })
        .collect();
    let m = traces.len() as f64;
    let steps = plan.budget.iterations + 1;
    let seed_mean = |f: &dyn Fn(&apdg_core::decentralized::DecentralizedRecord) -> f64| -> f64 {
        (0..steps)
            .map(|k| traces.iter().map(|t| f(&t.records[k])).sum::<f64>() / m)
            .fold(0.0, f64::max)
    };
    let b = &plan.budget;
    let mean = outcomes.iter().map(|o| o.criterion).sum::<f64>() / m;
    let (bx, by) = b.distance_bounds(&plan.params, b.iterations);
    let mx = traces.iter().map(|t| t.last().dist_x2).sum::<f64>() / m;
    let my = traces.iter().map(|t| t.last().dist_y2).sum::<f64>() / m;
    let checks = vec![
        Check::at_most("mean final criterion", mean, b.eps),
        Check::at_most(
            "seed-mean consensus error after projection",
            seed_mean(&|r| r.consensus_error_x.max(r.consensus_error_y)),
            1.1 * b.delta_prime.sqrt(),
        ),
        Check::at_most(
            "seed-mean pre-consensus spread",
            seed_mean(&|r| r.spread_u.max(r.spread_w)),
            b.d,
        ),
        Check::at_most("mean final x distance vs twice the bound", mx, 2.0 * bx),
        Check::at_most("mean final y distance vs twice the bound", my, 2.0 * by),
    ];
    Ok(SeedRuns {
        traces,
        outcomes,
        checks,
    })
}

/// Theory-side numbers reported next to measurements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Predictions {
    pub regime: Regime,
    pub rate: f64,
    pub rate_bound: f64,
    pub lower_bound: f64,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decentralized: Option<DecentralizedCounts>,
}

pub fn centralized_predictions(plan: &CentralizedPlan) -> Result<Predictions> {
    Ok(Predictions {
        regime: plan.params.regime,
        rate: 1.0 / (1.0 - plan.params.theta),
        rate_bound: predict_rate_bound(&plan.constants, plan.params.regime)?,
        lower_bound: predict_lower_bound(&plan.constants, plan.eps),
        iterations: plan.iterations,
        decentralized: None,
    })
}

pub fn decentralized_predictions(plan: &DecentralizedPlan<f64>) -> Result<Predictions> {
    let b = &plan.budget;
    let kappa = b.tau as f64 / b.lambda;
    Ok(Predictions {
        regime: plan.params.regime,
        rate: 1.0 / (1.0 - plan.params.theta),
        rate_bound: predict_rate_bound(&b.hatted, plan.params.regime)?,
        lower_bound: predict_lower_bound(&b.plain, b.eps),
        iterations: b.iterations,
        decentralized: Some(predict_decentralized_counts(b, plan.params.theta, kappa)),
    })
}

pub fn plan_decentralized_run(
    problem: &Problem,
    schedule: &Schedule,
    spec: &StochasticOracleSpec<f64>,
    eps: f64,
    regime: RegimeChoice,
    iterations: Option<usize>,
    rounds: Option<usize>,
) -> Result<DecentralizedPlan<f64>> {
    let mut plan = plan_decentralized(problem, schedule, spec, eps, regime)?;
    if let Some(n) = iterations {
        plan.budget.iterations = n;
    }
    if let Some(t) = rounds {
        plan.budget.rounds = t;
    }
    Ok(plan)
}

/// Random strongly-convex-strongly-concave instance with `d_x = d_y = d`
/// and constants drawn from fixed ranges.
pub fn random_instance(seed: u64, d: usize) -> Result<Problem> {
    let mut rng = SeedStreams::new(seed).auxiliary(2);
    let mut spec = GeneratorSpec::new(1, d, d, 0.0, 0.0, 0.0, seed);
    spec.mu_x = rng.random_range(0.05..0.5);
    spec.l_x = rng.random_range(1.0..5.0);
    spec.mu_y = rng.random_range(0.05..0.5);
    spec.l_y = rng.random_range(1.0..5.0);
    spec.l_xy = rng.random_range(0.5..3.0);
    spec.coupling_min = Some(spec.l_xy * rng.random_range(0.1..0.9));
    Ok(apdg_core::problem::generate(&spec)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub instances: usize,
    pub steps: usize,
    /// Largest `(Ψᵏ⁺¹ − θΨᵏ)/Ψ⁰` over all instances and steps.
    pub worst_excess: f64,
}

/// Exact-oracle runs on random instances, tracking the worst violation of
/// `Ψᵏ⁺¹ ≤ θΨᵏ`.
pub fn contraction_experiment(
    instances: usize,
    dim: usize,
    steps: usize,
    seed: u64,
) -> Result<ContractionReport> {
    let worst = (0..instances as u64)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let p = random_instance(seed.wrapping_add(i), dim)?;
            let plan = plan_centralized(
                &p,
                &StochasticOracleSpec::noiseless(1),
                1e-6,
                RegimeChoice::Auto,
                None,
            )?;
            let trace = run_centralized(&p, &plan, steps, 0)?;
            Ok(contraction_excess(&trace, plan.params.theta))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ContractionReport {
        instances,
        steps,
        worst_excess: worst,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub tuples: usize,
    pub checked: usize,
    pub violations: usize,
    /// Largest `(1/(1−θ))/bound`.
    pub worst_ratio: f64,
}

/// Random constant tuples; every feasible regime's selected `1/(1−θ)` is
/// compared with its explicit bound without tolerance.
pub fn rate_consistency(tuples: usize, seed: u64) -> Result<RateReport> {
    let mut rng = SeedStreams::new(seed).auxiliary(3);
    let mut checked = 0;
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..tuples {
        let l_x: f64 = 10f64.powf(rng.random_range(-1.0..2.0));
        let l_y: f64 = 10f64.powf(rng.random_range(-1.0..2.0));
        let l_xy: f64 = 10f64.powf(rng.random_range(-1.0..2.0));
        let zero_x = rng.random_bool(0.2);
        let zero_y = rng.random_bool(0.2);
        let c = ModelConstants {
            mu_x: if zero_x {
                0.0
            } else {
                l_x * 10f64.powf(rng.random_range(-4.0..0.0))
            },
            l_x,
            mu_y: if zero_y {
                0.0
            } else {
                l_y * 10f64.powf(rng.random_range(-4.0..0.0))
            },
            l_y,
            l_xy,
            mu_xy: l_xy * 10f64.powf(rng.random_range(-2.0..0.0)),
            mu_yx: l_xy * 10f64.powf(rng.random_range(-2.0..0.0)),
        };
        for regime in Regime::ALL {
            if !regime.is_feasible(&c) {
                continue;
            }
            let p = select_parameters(&c, RegimeChoice::Fixed(regime))?;
            let bound = predict_rate_bound(&c, regime)?;
            let rate = 1.0 / (1.0 - p.theta);
            checked += 1;
            if rate > bound {
                violations += 1;
            }
            worst = worst.max(rate / bound);
        }
    }
    Ok(RateReport {
        tuples,
        checked,
        violations,
        worst_ratio: worst,
    })
}

/// Well-conditioned instance used by the bias and stochastic experiments.
pub fn demo_instance(dim: usize, seed: u64) -> Result<Problem> {
    let mut spec = GeneratorSpec::new(1, dim, dim, 0.5, 2.0, 1.0, seed);
    spec.coupling_min = Some(0.5);
    Ok(apdg_core::problem::generate(&spec)?)
}

/// Five-node instance used by the decentralized experiments.
pub fn network_instance(n: usize, seed: u64) -> Result<Problem> {
    let mut spec = GeneratorSpec::new(n, 3, 3, 1.0, 2.0, 1.0, seed);
    spec.heterogeneity = 0.3;
    Ok(apdg_core::problem::generate(&spec)?)
}

/// Grid of a scaling sweep. Every field has a default, so `{}` is the
/// standard 5×5 grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub mu_x: Vec<f64>,
    pub mu_y: Vec<f64>,
    pub l_x: f64,
    pub l_y: f64,
    pub l_xy: f64,
    pub dim: usize,
    pub eps: f64,
    pub regime: RegimeChoice,
    pub max_iters: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        let grid = vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0];
        Self {
            mu_x: grid.clone(),
            mu_y: grid,
            l_x: 1.0,
            l_y: 1.0,
            l_xy: 1.0,
            dim: 2,
            eps: 1e-6,
            regime: RegimeChoice::Fixed(Regime::A),
            max_iters: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Reached,
    MaxIters,
    Diverged,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub mu_x: f64,
    pub mu_y: f64,
    pub iterations: Option<usize>,
    pub status: CellStatus,
    /// `1/√(µ_xµ_y)`.
    pub geometric: f64,
    /// `1/min{µ_x, µ_y}`.
    pub minimum: f64,
    pub rate: Option<f64>,
    pub residual_geometric: Option<f64>,
    pub residual_minimum: Option<f64>,
}

/// Least-squares line `y = a + b·x` and its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogFit {
    pub intercept: f64,
    pub slope: f64,
    pub r2: f64,
}

pub fn fit_line(points: &[(f64, f64)]) -> Option<LogFit> {
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Some(LogFit {
        intercept,
        slope,
        r2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
    pub geometric_fit: Option<LogFit>,
    pub minimum_fit: Option<LogFit>,
}

fn spread(lo: f64, hi: f64, d: usize) -> DVector<f64> {
    DVector::from_fn(d, |i, _| {
        if d == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (d - 1) as f64
        }
    })
}

/// Diagonal instance with curvatures spread over `[µ, L]` and a coupling
/// that leaves the first (weakest) coordinate of each block untouched and
/// ties the rest with strength `l_xy`. The weak directions are then only
/// damped by strong convexity, which is what the regime-A rate accounts for.
pub fn sweep_instance(spec: &SweepSpec, mu_x: f64, mu_y: f64) -> Result<Problem> {
    let d = spec.dim;
    if d < 2 {
        bail!("sweep instances need dim >= 2, got {d}");
    }
    let f = Quadratic::new(
        DMatrix::from_diagonal(&spread(mu_x, spec.l_x, d)),
        DVector::zeros(d),
        0.0,
    )?;
    let g = Quadratic::new(
        DMatrix::from_diagonal(&spread(mu_y, spec.l_y, d)),
        DVector::zeros(d),
        0.0,
    )?;
    let a = DMatrix::from_fn(d, d, |i, j| if i == j && i > 0 { spec.l_xy } else { 0.0 });
    Ok(SaddlePointProblem::new(
        vec![LocalPair { f, g }],
        a,
        false,
        false,
    )?)
}

fn sweep_cell(spec: &SweepSpec, mu_x: f64, mu_y: f64) -> SweepCell {
    let mut cell = SweepCell {
        mu_x,
        mu_y,
        iterations: None,
        status: CellStatus::Failed,
        geometric: 1.0 / (mu_x * mu_y).sqrt(),
        minimum: 1.0 / mu_x.min(mu_y),
        rate: None,
        residual_geometric: None,
        residual_minimum: None,
    };
    let outcome = (|| -> Result<(Trace<f64>, f64)> {
        let p = sweep_instance(spec, mu_x, mu_y)?;
        let truth = solve_ground_truth(&p)?;
        let params = select_parameters(&p.model_constants()?, spec.regime)?;
        let unit = DVector::from_element(spec.dim, 1.0 / (spec.dim as f64).sqrt());
        let start = SolverState::at(unit.clone(), unit);
        let stop = StopRule {
            max_iters: spec.max_iters,
            target_eps: Some(spec.eps),
        };
        let trace = run(&p, &params, &truth, start, &mut ExactOracle::new(&p), stop)?;
        Ok((trace, 1.0 / (1.0 - params.theta)))
    })();
    match outcome {
        Ok((trace, rate)) => {
            cell.rate = Some(rate);
            if trace.reached_target {
                cell.status = CellStatus::Reached;
                cell.iterations = Some(trace.last().k);
            } else {
                cell.status = CellStatus::MaxIters;
            }
        }
        Err(e) => {
            cell.status = match e.downcast_ref::<Error>() {
                Some(Error::Divergence { .. }) => CellStatus::Diverged,
                _ => CellStatus::Failed,
            };
        }
    }
    cell
}

/// Iterations to reach `max{‖x − x*‖², ‖y − y*‖²} ≤ ε` from the unit
/// start `(1, …, 1)/√d` over a `(µ_x, µ_y)` grid of [`sweep_instance`]s, with log-log fits against both
/// predictors. Cells run in parallel; a failing cell is recorded and the
/// sweep continues.
pub fn scaling_sweep(spec: &SweepSpec) -> SweepReport {
    let grid: Vec<(f64, f64)> = spec
        .mu_x
        .iter()
        .flat_map(|&a| spec.mu_y.iter().map(move |&b| (a, b)))
        .collect();
    let mut cells: Vec<SweepCell> = grid
        .par_iter()
        .map(|&(a, b)| sweep_cell(spec, a, b))
        .collect();
    let reached: Vec<&SweepCell> = cells
        .iter()
        .filter(|c| c.iterations.is_some_and(|k| k > 0))
        .collect();
    let points = |f: fn(&SweepCell) -> f64| -> Vec<(f64, f64)> {
        reached
            .iter()
            .map(|c| (f(c).ln(), (c.iterations.unwrap() as f64).ln()))
            .collect()
    };
    let geometric_fit = fit_line(&points(|c| c.geometric));
    let minimum_fit = fit_line(&points(|c| c.minimum));
    for c in cells.iter_mut() {
        if let Some(k) = c.iterations.filter(|&k| k > 0) {
            let y = (k as f64).ln();
            c.residual_geometric =
                geometric_fit.map(|f| y - f.intercept - f.slope * c.geometric.ln());
            c.residual_minimum = minimum_fit.map(|f| y - f.intercept - f.slope * c.minimum.ln());
        }
    }
    SweepReport {
        cells,
        geometric_fit,
        minimum_fit,
    }
}

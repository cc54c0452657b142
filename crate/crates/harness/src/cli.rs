//! Command-line verbs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use apdg_core::network::{certify_contraction, ScheduleFile};
use apdg_core::problem::{generate, GeneratorSpec};
use apdg_core::Problem;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{self, ExperimentConfig, LoadedConfig, Mode};
use crate::experiments::{
    centralized_checks, centralized_predictions, decentralized_checks, decentralized_predictions,
    plan_centralized, plan_decentralized_run, scaling_sweep, Check, Predictions, SweepReport,
    SweepSpec,
};
use crate::output::{self, Format, CENTRALIZED_COLUMNS, DECENTRALIZED_COLUMNS, SWEEP_COLUMNS};

#[derive(Debug, Parser)]
#[command(
    name = "apdg",
    version,
    about = "Accelerated primal-dual gradient experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random quadratic instance and print its constants.
    Generate(GenerateArgs),
    /// Execute an experiment config and check its invariants.
    Run(RunArgs),
    /// Iterations-to-ε over a (µ_x, µ_y) grid with log-log fits.
    Sweep(SweepArgs),
    /// Certify the contraction of a gossip schedule.
    Certify(CertifyArgs),
    /// Print the planned parameters, budget and complexity predictions.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Generator spec as JSON; flags below are ignored when given.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub dim_x: usize,
    #[arg(long, default_value_t = 2)]
    pub dim_y: usize,
    #[arg(long, default_value_t = 1.0)]
    pub mu_x: f64,
    #[arg(long, default_value_t = 1.0)]
    pub l_x: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu_y: f64,
    #[arg(long, default_value_t = 1.0)]
    pub l_y: f64,
    #[arg(long, default_value_t = 1.0)]
    pub l_xy: f64,
    #[arg(long)]
    pub coupling_min: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub heterogeneity: f64,
    #[arg(long, default_value_t = 1.0)]
    pub linear_scale: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Problem file to write; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// First seed; overrides the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of consecutive seeds; overrides the config.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Output directory; overrides the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep grid as JSON; the default 5×5 grid when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "apdg-sweep")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Schedule file.
    #[arg(long)]
    pub config: PathBuf,
    /// Window length; the file's `tau` or 1 when absent.
    #[arg(long)]
    pub tau: Option<usize>,
    #[arg(long, default_value_t = 64)]
    pub trials: usize,
    /// Also write this many mixing matrices to `--out`.
    #[arg(long, default_value_t = 0)]
    pub export: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Runs one verb; `Ok(false)` means a check failed.
pub fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Generate(a) => generate_cmd(a),
        Command::Run(a) => run_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Certify(a) => certify_cmd(a),
        Command::Predict(a) => predict_cmd(a),
    }
}

fn print_json<V: Serialize>(value: &V) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn generate_cmd(a: GenerateArgs) -> Result<bool> {
    let spec: GeneratorSpec = match &a.config {
        Some(path) => config::parse_json(&config::read(path)?, path)?,
        None => GeneratorSpec {
            n: a.n,
            dim_x: a.dim_x,
            dim_y: a.dim_y,
            mu_x: a.mu_x,
            l_x: a.l_x,
            mu_y: a.mu_y,
            l_y: a.l_y,
            l_xy: a.l_xy,
            coupling_min: a.coupling_min,
            heterogeneity: a.heterogeneity,
            linear_scale: a.linear_scale,
            seed: a.seed,
        },
    };
    let problem: Problem = generate(&spec)?;
    let constants = problem.model_constants()?;
    match &a.out {
        Some(path) => {
            std::fs::write(path, problem.to_json() + "\n")
                .with_context(|| format!("cannot write {}", path.display()))?;
            print_json(&constants)?;
        }
        None => {
            println!("{}", problem.to_json());
            eprintln!("{}", serde_json::to_string(&constants)?);
        }
    }
    Ok(true)
}

/// Everything a run reports: the plan actually used, theory predictions,
/// per-seed outcomes and the checks.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub name: Option<String>,
    pub mode: Mode,
    pub seeds: Vec<u64>,
    pub iterations: usize,
    pub plan: serde_json::Value,
    pub predictions: Predictions,
    pub outcomes: serde_json::Value,
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn out_dir(loaded: &LoadedConfig, flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| loaded.config.out.as_ref().map(|p| loaded.base.join(p)))
        .unwrap_or_else(|| PathBuf::from("apdg-run"))
}

/// Executes a loaded config for the given seeds and writes one trace per
/// seed plus `summary.json` into `out` (nothing is written when `out` is
/// `None`).
pub fn run_experiment(
    loaded: &LoadedConfig,
    seeds: &[u64],
    out: Option<&Path>,
    format: Format,
) -> Result<RunSummary> {
    let cfg = &loaded.config;
    let problem = loaded.problem()?;
    let spec = cfg.oracle_spec(problem.n())?;
    let trace_path =
        |dir: &Path, seed: u64| dir.join(format!("trace_seed{seed}.{}", format.extension()));
    let summary = match cfg.mode {
        Mode::Centralized => {
            if cfg.rounds.is_some() || cfg.schedule.is_some() {
                bail!("\"rounds\" and \"schedule\" apply to decentralized runs only");
            }
            let plan = plan_centralized(&problem, &spec, cfg.eps, cfg.regime, cfg.bias_delta)?;
            let iterations = cfg.max_iters.unwrap_or(plan.iterations);
            let runs = centralized_checks(&problem, &plan, iterations, seeds)?;
            if let Some(dir) = out {
                for (t, &s) in runs.traces.iter().zip(seeds) {
                    output::write_records(
                        &trace_path(dir, s),
                        &CENTRALIZED_COLUMNS,
                        &t.records,
                        format,
                    )?;
                }
            }
            RunSummary {
                name: cfg.name.clone(),
                mode: cfg.mode,
                seeds: seeds.to_vec(),
                iterations,
                predictions: centralized_predictions(&plan)?,
                plan: serde_json::to_value(&plan)?,
                outcomes: serde_json::to_value(&runs.outcomes)?,
                passed: runs.passed(),
                checks: runs.checks,
            }
        }
        Mode::Decentralized => {
            if cfg.bias_delta.is_some() {
                bail!("\"bias_delta\" applies to centralized runs only");
            }
            let schedule = loaded.schedule()?;
            let plan = plan_decentralized_run(
                &problem,
                &schedule,
                &spec,
                cfg.eps,
                cfg.regime,
                cfg.max_iters,
                cfg.rounds,
            )?;
            let runs = decentralized_checks(&problem, &schedule, &spec, &plan, seeds)?;
            if let Some(dir) = out {
                for (t, &s) in runs.traces.iter().zip(seeds) {
                    output::write_records(
                        &trace_path(dir, s),
                        &DECENTRALIZED_COLUMNS,
                        &t.records,
                        format,
                    )?;
                }
            }
            RunSummary {
                name: cfg.name.clone(),
                mode: cfg.mode,
                seeds: seeds.to_vec(),
                iterations: plan.budget.iterations,
                predictions: decentralized_predictions(&plan)?,
                plan: serde_json::to_value(&plan)?,
                outcomes: serde_json::to_value(&runs.outcomes)?,
                passed: runs.passed(),
                checks: runs.checks,
            }
        }
    };
    if let Some(dir) = out {
        output::write_json(&dir.join("summary.json"), &summary)?;
    }
    Ok(summary)
}

fn run_cmd(a: RunArgs) -> Result<bool> {
    let loaded = config::load(&a.config)?;
    let first = a.seed.unwrap_or(loaded.config.seed);
    let count = a.seeds.unwrap_or(loaded.config.seeds);
    if count == 0 {
        bail!("--seeds must be at least 1");
    }
    let seeds: Vec<u64> = (0..count as u64).map(|i| first.wrapping_add(i)).collect();
    let dir = out_dir(&loaded, a.out);
    let summary = run_experiment(&loaded, &seeds, Some(&dir), a.format)?;
    for c in &summary.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] {}: {:.6e} (limit {:.6e})",
            c.name, c.measured, c.limit
        );
    }
    println!("summary: {}", dir.join("summary.json").display());
    Ok(summary.passed)
}

fn sweep_cmd(a: SweepArgs) -> Result<bool> {
    let spec: SweepSpec = match &a.config {
        Some(path) => config::parse_json(&config::read(path)?, path)?,
        None => SweepSpec::default(),
    };
    let report: SweepReport = scaling_sweep(&spec);
    let table = a.out.join(format!("sweep.{}", a.format.extension()));
    output::write_records(&table, &SWEEP_COLUMNS, &report.cells, a.format)?;
    #[derive(Serialize)]
    struct SweepSummary<'a> {
        spec: &'a SweepSpec,
        report: &'a SweepReport,
    }
    output::write_json(
        &a.out.join("sweep_summary.json"),
        &SweepSummary {
            spec: &spec,
            report: &report,
        },
    )?;
    for (label, fit) in [
        ("geometric", report.geometric_fit),
        ("minimum", report.minimum_fit),
    ] {
        match fit {
            Some(f) => println!(
                "{label} model: slope {:.4}, intercept {:.4}, R² {:.4}",
                f.slope, f.intercept, f.r2
            ),
            None => println!("{label} model: not enough cells to fit"),
        }
    }
    println!("table: {}", table.display());
    Ok(true)
}

fn certify_cmd(a: CertifyArgs) -> Result<bool> {
    let file = ScheduleFile::from_json(&config::read(&a.config)?)
        .with_context(|| format!("schedule file {}", a.config.display()))?;
    let schedule = file.to_schedule::<f64>()?;
    let tau = a.tau.or(file.tau).unwrap_or(1);
    let certificate = certify_contraction(&schedule, tau, a.trials)?;
    #[derive(Serialize)]
    struct Report<T: Serialize> {
        n: usize,
        certificate: T,
        /// `τ/λ`, the communication rounds per unit of `ln(1/accuracy)`.
        kappa: f64,
    }
    print_json(&Report {
        n: schedule.n(),
        certificate,
        kappa: tau as f64 / certificate.lambda,
    })?;
    if a.export > 0 {
        let Some(dir) = &a.out else {
            bail!("--export needs --out");
        };
        output::write_json(
            &dir.join("matrices.json"),
            &schedule.export_matrices(a.export),
        )?;
    }
    Ok(true)
}

fn predict_cmd(a: PredictArgs) -> Result<bool> {
    let loaded = config::load(&a.config)?;
    let cfg: &ExperimentConfig = &loaded.config;
    let problem = loaded.problem()?;
    let spec = cfg.oracle_spec(problem.n())?;
    #[derive(Serialize)]
    struct Prediction {
        plan: serde_json::Value,
        predictions: Predictions,
    }
    let report = match cfg.mode {
        Mode::Centralized => {
            let plan = plan_centralized(&problem, &spec, cfg.eps, cfg.regime, cfg.bias_delta)?;
            Prediction {
                predictions: centralized_predictions(&plan)?,
                plan: serde_json::to_value(&plan)?,
            }
        }
        Mode::Decentralized => {
            let schedule = loaded.schedule()?;
            let plan = plan_decentralized_run(
                &problem,
                &schedule,
                &spec,
                cfg.eps,
                cfg.regime,
                cfg.max_iters,
                cfg.rounds,
            )?;
            Prediction {
                predictions: decentralized_predictions(&plan)?,
                plan: serde_json::to_value(&plan)?,
            }
        }
    };
    match &a.out {
        Some(path) => output::write_json(path, &report)?,
        None => print_json(&report)?,
    }
    Ok(true)
}

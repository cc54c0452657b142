//! Experiment configuration files.
//!
//! ```json
//! {
//!   "mode": "decentralized",
//!   "problem": { "generate": { "n": 5, "dim_x": 3, "dim_y": 3, "mu_x": 1.0,
//!                "l_x": 2.0, "mu_y": 1.0, "l_y": 2.0, "l_xy": 1.0, "seed": 7 } },
//!   "schedule": { "ring": 5 },
//!   "eps": 1e-3,
//!   "sigma_f2": 0.1,
//!   "sigma_g2": 0.1,
//!   "seeds": 30,
//!   "out": "runs/ring"
//! }
//! ```
//!
//! Relative paths resolve against the directory of the config file.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use apdg_core::apdg::RegimeChoice;
use apdg_core::network::{certify_contraction, MixingSchedule, ScheduleFile};
use apdg_core::problem::{
    generate, GeneratorSpec, NoiseModel, SaddlePointProblem, StochasticOracleSpec,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Centralized,
    Decentralized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemSource {
    File(PathBuf),
    Generate(GeneratorSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleSource {
    File(PathBuf),
    Ring(usize),
    Inline(ScheduleFile),
}

/// One variance for every node, or one per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Variance {
    Uniform(f64),
    PerNode(Vec<f64>),
}

impl Default for Variance {
    fn default() -> Self {
        Variance::Uniform(0.0)
    }
}

impl Variance {
    pub fn expand(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            Variance::Uniform(v) => Ok(vec![*v; n]),
            Variance::PerNode(v) if v.len() == n => Ok(v.clone()),
            Variance::PerNode(v) => bail!("{} variances given for {n} nodes", v.len()),
        }
    }
}

fn one() -> usize {
    1
}

fn default_trials() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub mode: Mode,
    pub problem: ProblemSource,
    #[serde(default)]
    pub schedule: Option<ScheduleSource>,
    /// Certification window; a `tau` inside the schedule file wins.
    #[serde(default = "one")]
    pub tau: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub eps: f64,
    #[serde(default)]
    pub regime: RegimeChoice,
    #[serde(default)]
    pub sigma_f2: Variance,
    #[serde(default)]
    pub sigma_g2: Variance,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub seeds: usize,
    /// Overrides the planned iteration count.
    #[serde(default)]
    pub max_iters: Option<usize>,
    /// Overrides the planned consensus rounds per iteration.
    #[serde(default)]
    pub rounds: Option<usize>,
    /// Output directory, relative to the config file.
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Centralized only: inject a constant gradient error whose model
    /// inexactness is this `δ`.
    #[serde(default)]
    pub bias_delta: Option<f64>,
}

impl ExperimentConfig {
    pub fn oracle_spec(&self, n: usize) -> Result<StochasticOracleSpec<f64>> {
        Ok(StochasticOracleSpec::new(
            self.sigma_f2.expand(n)?,
            self.sigma_g2.expand(n)?,
            NoiseModel::GaussianIsotropic,
        )?)
    }
}

/// A parsed config together with the directory its paths are relative to.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub base: PathBuf,
}

impl LoadedConfig {
    pub fn problem(&self) -> Result<SaddlePointProblem<f64>> {
        match &self.config.problem {
            ProblemSource::Generate(spec) => Ok(generate(spec)?),
            ProblemSource::File(path) => {
                let path = self.base.join(path);
                let text = read(&path)?;
                SaddlePointProblem::from_json(&text)
                    .with_context(|| format!("problem file {}", path.display()))
            }
        }
    }

    /// The schedule, certified with the configured window.
    pub fn schedule(&self) -> Result<MixingSchedule<f64>> {
        let file = match &self.config.schedule {
            None => bail!("decentralized runs need a \"schedule\" entry"),
            Some(ScheduleSource::Ring(n)) => ScheduleFile::ring(*n),
            Some(ScheduleSource::Inline(f)) => f.clone(),
            Some(ScheduleSource::File(path)) => {
                let path = self.base.join(path);
                let text = read(&path)?;
                ScheduleFile::from_json(&text)
                    .with_context(|| format!("schedule file {}", path.display()))?
            }
        };
        let schedule = file.to_schedule::<f64>()?;
        let tau = file.tau.unwrap_or(self.config.tau);
        let certificate = certify_contraction(&schedule, tau, self.config.trials)?;
        Ok(schedule.with_certificate(certificate))
    }
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Parses JSON, reporting failures as `path:line:column: message`.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &Path) -> Result<T> {
    serde_json::from_str(text)
        .map_err(|e| anyhow!("{}:{}:{}: {}", origin.display(), e.line(), e.column(), e))
}

pub fn load(path: &Path) -> Result<LoadedConfig> {
    let text = read(path)?;
    let config: ExperimentConfig = parse_json(&text, path)?;
    if !(config.eps > 0.0) {
        bail!("{}: eps must be positive", path.display());
    }
    if config.seeds == 0 {
        bail!("{}: seeds must be at least 1", path.display());
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedConfig { config, base })
}

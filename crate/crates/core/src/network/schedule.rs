use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{find, metropolis_weights, stochasticity_defect, Certificate, Graph};
use crate::error::{Error, Result};
use crate::linalg::max_asymmetry;
use crate::problem::format::{matrix_to_rows, rows_to_matrix};
use crate::rng::SeedStreams;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleGenerator {
    /// One matrix for every round.
    StaticGraph,
    /// Cycles through a fixed list of graphs.
    PeriodicSequence,
    /// Round `k` uses a random connected spanning subgraph of a base graph.
    RandomSwitching,
}

#[derive(Debug, Clone, PartialEq)]
enum Source<T: Scalar> {
    Fixed(Vec<DMatrix<T>>),
    Random {
        base: Graph,
        keep_probability: f64,
        seed: u64,
    },
}

/// Sequence of doubly stochastic mixing matrices `W⁰, W¹, …`, built
/// lazily for random schedules.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingSchedule<T: Scalar> {
    n: usize,
    generator: ScheduleGenerator,
    graphs: Vec<Graph>,
    source: Source<T>,
    certificate: Option<Certificate<T>>,
}

const DOUBLY_STOCHASTIC_TOL: f64 = 1e-12;

impl<T: Scalar> MixingSchedule<T> {
    /// Metropolis weights on a fixed graph.
    pub fn static_graph(graph: Graph) -> Self {
        let w = metropolis_weights(&graph);
        Self {
            n: graph.n(),
            generator: ScheduleGenerator::StaticGraph,
            graphs: vec![graph],
            source: Source::Fixed(vec![w]),
            certificate: None,
        }
    }

    /// A fixed, user-supplied mixing matrix.
    pub fn static_matrix(w: DMatrix<T>) -> Result<Self> {
        validate_matrix(&w)?;
        let graph = pattern(&w)?;
        Ok(Self {
            n: w.nrows(),
            generator: ScheduleGenerator::StaticGraph,
            graphs: vec![graph],
            source: Source::Fixed(vec![w]),
            certificate: None,
        })
    }

    /// Metropolis weights on each graph in turn, repeating.
    pub fn periodic(graphs: Vec<Graph>) -> Result<Self> {
        let n = graphs.first().ok_or(Error::Empty("graph sequence"))?.n();
        if graphs.iter().any(|g| g.n() != n) {
            return Err(Error::InvalidArgument(
                "all graphs of a periodic schedule need the same node count".into(),
            ));
        }
        let ws = graphs.iter().map(metropolis_weights).collect();
        Ok(Self {
            n,
            generator: ScheduleGenerator::PeriodicSequence,
            graphs,
            source: Source::Fixed(ws),
            certificate: None,
        })
    }

    /// Round `k` keeps a random spanning tree of `base` plus each other edge
    /// with probability `keep_probability`.
    pub fn random_switching(base: Graph, keep_probability: f64, seed: u64) -> Result<Self> {
        if !base.is_connected() {
            return Err(Error::InvalidArgument(
                "random switching needs a connected base graph".into(),
            ));
        }
        if !(0.0..=1.0).contains(&keep_probability) {
            return Err(Error::InvalidArgument(format!(
                "keep probability {keep_probability} outside [0, 1]"
            )));
        }
        Ok(Self {
            n: base.n(),
            generator: ScheduleGenerator::RandomSwitching,
            graphs: vec![base.clone()],
            source: Source::Random {
                base,
                keep_probability,
                seed,
            },
            certificate: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generator(&self) -> ScheduleGenerator {
        self.generator
    }

    pub fn is_static(&self) -> bool {
        self.generator == ScheduleGenerator::StaticGraph
    }

    /// Distinct matrices before the sequence repeats (`None` if it never does).
    pub fn period(&self) -> Option<usize> {
        match &self.source {
            Source::Fixed(ws) => Some(ws.len()),
            Source::Random { .. } => None,
        }
    }

    /// Communication graph of round `k`.
    pub fn graph(&self, k: usize) -> Graph {
        match &self.source {
            Source::Fixed(_) => self.graphs[k % self.graphs.len()].clone(),
            Source::Random {
                base,
                keep_probability,
                seed,
            } => random_subgraph(base, *keep_probability, *seed, k),
        }
    }

    /// Mixing matrix of round `k`.
    pub fn matrix(&self, k: usize) -> DMatrix<T> {
        match &self.source {
            Source::Fixed(ws) => ws[k % ws.len()].clone(),
            Source::Random { .. } => metropolis_weights(&self.graph(k)),
        }
    }

    pub(crate) fn with_matrix<R>(&self, k: usize, f: impl FnOnce(&DMatrix<T>) -> R) -> R {
        match &self.source {
            Source::Fixed(ws) => f(&ws[k % ws.len()]),
            Source::Random { .. } => f(&metropolis_weights(&self.graph(k))),
        }
    }

    /// `Wᵏ⁺ᵗ⁻¹ ··· Wᵏ` in the order consensus applies them (right multiplication).
    pub fn window_product(&self, start: usize, tau: usize) -> DMatrix<T> {
        let mut p = DMatrix::identity(self.n, self.n);
        for t in 0..tau {
            p = self.with_matrix(start + t, |w| &p * w);
        }
        p
    }

    pub fn certificate(&self) -> Option<&Certificate<T>> {
        self.certificate.as_ref()
    }

    pub fn with_certificate(mut self, certificate: Certificate<T>) -> Self {
        self.certificate = Some(certificate);
        self
    }

    /// `(τ, λ)` of the attached certificate.
    pub fn contraction(&self) -> Result<(usize, T)> {
        self.certificate
            .as_ref()
            .map(|c| (c.tau, c.lambda))
            .ok_or_else(|| Error::InvalidArgument("schedule has no contraction certificate".into()))
    }

    /// Mixing matrices of rounds `0..count` as nested row-major arrays.
    pub fn export_matrices(&self, count: usize) -> Vec<Vec<Vec<f64>>> {
        (0..count)
            .map(|k| self.with_matrix(k, matrix_to_rows))
            .collect()
    }
}

fn validate_matrix<T: Scalar>(w: &DMatrix<T>) -> Result<()> {
    if w.is_empty() {
        return Err(Error::Empty("mixing matrix"));
    }
    if w.nrows() != w.ncols() {
        return Err(Error::Dimension {
            what: "mixing matrix columns",
            expected: w.nrows(),
            got: w.ncols(),
        });
    }
    if !w.iter().all(|v| v.is_finite_value()) {
        return Err(Error::NonFinite("mixing matrix"));
    }
    if w.iter().any(|&v| v < T::zero()) {
        return Err(Error::Invariant(
            "mixing matrix has negative entries".into(),
        ));
    }
    let defect = stochasticity_defect(w);
    if defect > T::tol(DOUBLY_STOCHASTIC_TOL) {
        return Err(Error::Invariant(format!(
            "mixing matrix is not doubly stochastic (defect {defect})"
        )));
    }
    Ok(())
}

fn pattern<T: Scalar>(w: &DMatrix<T>) -> Result<Graph> {
    if max_asymmetry(&w.map(|v| if v != T::zero() { T::one() } else { T::zero() })) > T::zero() {
        return Err(Error::Invariant(
            "mixing matrix sparsity pattern is not symmetric".into(),
        ));
    }
    let n = w.nrows();
    Graph::new(
        n,
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| w[(i, j)] != T::zero()),
    )
}

fn random_subgraph(base: &Graph, keep: f64, seed: u64, k: usize) -> Graph {
    let mut rng = SeedStreams::new(seed).auxiliary(k);
    let mut edges = base.edges().to_vec();
    edges.shuffle(&mut rng);
    let mut parent: Vec<usize> = (0..base.n()).collect();
    let mut chosen = Vec::with_capacity(edges.len());
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        // every coin is tossed so the draw sequence does not depend on the tree
        let coin = rng.random_bool(keep);
        if ra != rb {
            parent[ra] = rb;
            chosen.push((a, b));
        } else if coin {
            chosen.push((a, b));
        }
    }
    Graph::new(base.n(), chosen).expect("subgraph of a valid graph")
}

pub const SCHEDULE_FORMAT: &str = "apdg-schedule/1";

fn default_keep() -> f64 {
    0.5
}

/// JSON description of a schedule.
///
/// ```json
/// { "format": "apdg-schedule/1", "n": 5, "generator": "static_graph",
///   "epochs": [[[0, 1], [1, 2], [2, 3], [3, 4], [4, 0]]] }
/// ```
///
/// `epochs` holds one edge list for a static graph, the cycle for a periodic
/// sequence, or the base graph for random switching. Alternatively `matrix`
/// gives an explicit static mixing matrix. Optional `tau` requests a
/// certification window length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub format: String,
    pub n: usize,
    pub generator: ScheduleGenerator,
    #[serde(default)]
    pub epochs: Vec<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_keep")]
    pub keep_probability: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
}

impl ScheduleFile {
    pub fn ring(n: usize) -> Self {
        Self {
            format: SCHEDULE_FORMAT.into(),
            n,
            generator: ScheduleGenerator::StaticGraph,
            epochs: vec![Graph::ring(n)
                .map(|g| g.edges().to_vec())
                .unwrap_or_default()],
            matrix: None,
            keep_probability: default_keep(),
            seed: 0,
            tau: None,
        }
    }

    pub fn to_schedule<T: Scalar>(&self) -> Result<MixingSchedule<T>> {
        if self.format != SCHEDULE_FORMAT {
            return Err(Error::Format(format!(
                "unsupported format tag {:?}, expected {SCHEDULE_FORMAT:?}",
                self.format
            )));
        }
        let graphs = || -> Result<Vec<Graph>> {
            self.epochs
                .iter()
                .map(|e| Graph::new(self.n, e.iter().copied()))
                .collect()
        };
        match self.generator {
            ScheduleGenerator::StaticGraph => {
                if let Some(rows) = &self.matrix {
                    let w = rows_to_matrix(rows, "mixing matrix")?;
                    if w.nrows() != self.n {
                        return Err(Error::Format(format!(
                            "matrix has {} rows, header says n = {}",
                            w.nrows(),
                            self.n
                        )));
                    }
                    return MixingSchedule::static_matrix(w);
                }
                let mut gs = graphs()?;
                if gs.len() != 1 {
                    return Err(Error::Format(format!(
                        "a static schedule needs exactly one epoch, got {}",
                        gs.len()
                    )));
                }
                Ok(MixingSchedule::static_graph(gs.remove(0)))
            }
            ScheduleGenerator::PeriodicSequence => MixingSchedule::periodic(graphs()?),
            ScheduleGenerator::RandomSwitching => {
                let mut gs = graphs()?;
                if gs.len() != 1 {
                    return Err(Error::Format(
                        "random switching needs exactly one base epoch".into(),
                    ));
                }
                MixingSchedule::random_switching(gs.remove(0), self.keep_probability, self.seed)
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule records always serialize")
    }
}

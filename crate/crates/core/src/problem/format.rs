//! JSON instance format and the random instance generator.
//!
//! ```json
//! {
//!   "format": "apdg-problem/1",
//!   "dim_x": 2, "dim_y": 1,
//!   "coupling": [[1.0, 0.0]],
//!   "range_g_in_coupling": false,
//!   "range_f_in_coupling_transpose": false,
//!   "nodes": [
//!     { "f": { "curvature": [[1.0, 0.0], [0.0, 2.0]], "linear": [0.0, 0.0],
//!              "offset": 0.0, "mu": 1.0, "smoothness": 2.0 },
//!       "g": { ... } }
//!   ]
//! }
//! ```
//!
//! Matrices are row-major nested arrays; the declared constants are stored
//! explicitly and re-validated on load.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{LocalPair, QuadraticFunction, SaddlePointProblem};
use crate::error::{Error, Result};
use crate::linalg::random_orthogonal;
use crate::rng::SeedStreams;
use crate::Scalar;

pub const PROBLEM_FORMAT: &str = "apdg-problem/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticRecord {
    pub curvature: Vec<Vec<f64>>,
    pub linear: Vec<f64>,
    pub offset: f64,
    pub mu: f64,
    pub smoothness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub f: QuadraticRecord,
    pub g: QuadraticRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub format: String,
    pub dim_x: usize,
    pub dim_y: usize,
    pub coupling: Vec<Vec<f64>>,
    #[serde(default)]
    pub range_g_in_coupling: bool,
    #[serde(default)]
    pub range_f_in_coupling_transpose: bool,
    pub nodes: Vec<NodeRecord>,
}

pub(crate) fn matrix_to_rows<T: Scalar>(m: &DMatrix<T>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].as_f64()).collect())
        .collect()
}

pub(crate) fn rows_to_matrix<T: Scalar>(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<T>> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != nc) {
        return Err(Error::Format(format!("{what}: ragged rows")));
    }
    Ok(DMatrix::from_fn(nr, nc, |i, j| T::lit(rows[i][j])))
}

fn quad_record<T: Scalar>(q: &QuadraticFunction<T>) -> QuadraticRecord {
    QuadraticRecord {
        curvature: matrix_to_rows(q.curvature()),
        linear: q.linear().iter().map(|v| v.as_f64()).collect(),
        offset: q.offset().as_f64(),
        mu: q.mu().as_f64(),
        smoothness: q.smoothness().as_f64(),
    }
}

fn quad_from_record<T: Scalar>(r: &QuadraticRecord, what: &str) -> Result<QuadraticFunction<T>> {
    QuadraticFunction::with_constants(
        rows_to_matrix(&r.curvature, what)?,
        DVector::from_iterator(r.linear.len(), r.linear.iter().map(|&v| T::lit(v))),
        T::lit(r.offset),
        T::lit(r.mu),
        T::lit(r.smoothness),
    )
}

impl ProblemFile {
    pub fn from_problem<T: Scalar>(p: &SaddlePointProblem<T>) -> Self {
        let (range_g, range_f) = p.range_flags();
        Self {
            format: PROBLEM_FORMAT.to_string(),
            dim_x: p.dim_x(),
            dim_y: p.dim_y(),
            coupling: matrix_to_rows(p.coupling()),
            range_g_in_coupling: range_g,
            range_f_in_coupling_transpose: range_f,
            nodes: p
                .locals()
                .iter()
                .map(|l| NodeRecord {
                    f: quad_record(&l.f),
                    g: quad_record(&l.g),
                })
                .collect(),
        }
    }

    pub fn to_problem<T: Scalar>(&self) -> Result<SaddlePointProblem<T>> {
        if self.format != PROBLEM_FORMAT {
            return Err(Error::Format(format!(
                "unsupported format tag {:?}, expected {PROBLEM_FORMAT:?}",
                self.format
            )));
        }
        let a: DMatrix<T> = rows_to_matrix(&self.coupling, "coupling")?;
        if a.shape() != (self.dim_y, self.dim_x) {
            return Err(Error::Format(format!(
                "coupling is {}x{}, header says {}x{}",
                a.nrows(),
                a.ncols(),
                self.dim_y,
                self.dim_x
            )));
        }
        let locals = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                Ok(LocalPair {
                    f: quad_from_record(&n.f, &format!("node {i} f"))?,
                    g: quad_from_record(&n.g, &format!("node {i} g"))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SaddlePointProblem::new(
            locals,
            a,
            self.range_g_in_coupling,
            self.range_f_in_coupling_transpose,
        )
    }
}

impl<T: Scalar> SaddlePointProblem<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProblemFile::from_problem(self))
            .expect("problem records always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        file.to_problem()
    }
}

fn default_one() -> f64 {
    1.0
}

/// Targets for a random instance. Per-node curvatures are `Q·diag(λ)·Qᵀ`
/// with the spectrum pinned to `[µ·s_i, L·s_i]`, where the node scales `s_i`
/// average to one, so the averaged constants hit the targets. The coupling is
/// `U·diag(s)·Vᵀ` with singular values from `coupling_min` up to `l_xy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub dim_x: usize,
    pub dim_y: usize,
    pub mu_x: f64,
    pub l_x: f64,
    pub mu_y: f64,
    pub l_y: f64,
    pub l_xy: f64,
    /// Smallest singular value of the coupling; defaults to `l_xy`.
    #[serde(default)]
    pub coupling_min: Option<f64>,
    /// Spread of the node scales, in `[0, 0.9]`.
    #[serde(default)]
    pub heterogeneity: f64,
    #[serde(default = "default_one")]
    pub linear_scale: f64,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(
        n: usize,
        dim_x: usize,
        dim_y: usize,
        mu: f64,
        l: f64,
        l_xy: f64,
        seed: u64,
    ) -> Self {
        Self {
            n,
            dim_x,
            dim_y,
            mu_x: mu,
            l_x: l,
            mu_y: mu,
            l_y: l,
            l_xy,
            coupling_min: None,
            heterogeneity: 0.0,
            linear_scale: 1.0,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.dim_x == 0 || self.dim_y == 0 {
            return Err(Error::InvalidArgument(
                "node count and dimensions must be positive".into(),
            ));
        }
        for (name, mu, l) in [("x", self.mu_x, self.l_x), ("y", self.mu_y, self.l_y)] {
            if !(mu > 0.0 && l.is_finite() && mu <= l) {
                return Err(Error::Infeasible(format!(
                    "{name}-block targets need 0 < mu <= L (mu = {mu}, L = {l})"
                )));
            }
        }
        let lo = self.coupling_min.unwrap_or(self.l_xy);
        if !(self.l_xy > 0.0 && self.l_xy.is_finite() && lo >= 0.0 && lo <= self.l_xy) {
            return Err(Error::Infeasible(format!(
                "coupling targets need 0 <= coupling_min <= l_xy, l_xy > 0 (got {lo}, {})",
                self.l_xy
            )));
        }
        if !(0.0..=0.9).contains(&self.heterogeneity) {
            return Err(Error::InvalidArgument(format!(
                "heterogeneity {} outside [0, 0.9]",
                self.heterogeneity
            )));
        }
        Ok(())
    }
}

fn shaped_quadratic<T: Scalar, R: Rng + ?Sized>(
    d: usize,
    mu: f64,
    l: f64,
    linear_scale: f64,
    rng: &mut R,
) -> Result<QuadraticFunction<T>> {
    let mut spectrum: Vec<f64> = (0..d).map(|_| rng.random_range(mu..=l)).collect();
    spectrum[0] = mu;
    if d > 1 {
        spectrum[d - 1] = l;
    }
    let q: DMatrix<T> = random_orthogonal(d, rng);
    let diag = DMatrix::from_diagonal(&DVector::from_iterator(
        d,
        spectrum.iter().map(|&v| T::lit(v)),
    ));
    let p = &q * diag * q.transpose();
    let p = (&p + p.transpose()) * T::lit(0.5);
    let b = DVector::from_fn(d, |_, _| T::lit(linear_scale) * T::standard_normal(rng));
    QuadraticFunction::with_constants(p, b, T::zero(), T::lit(mu), T::lit(l))
}

/// Draws a random instance. The same spec always yields the same instance.
pub fn generate<T: Scalar>(spec: &GeneratorSpec) -> Result<SaddlePointProblem<T>> {
    spec.validate()?;
    let mut rng = SeedStreams::new(spec.seed).auxiliary(0);

    let raw: Vec<f64> = (0..spec.n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let centre = raw.iter().sum::<f64>() / spec.n as f64;
    let scales: Vec<f64> = raw
        .iter()
        .map(|u| 1.0 + spec.heterogeneity * (u - centre) / 2.0)
        .collect();

    let k = spec.dim_x.min(spec.dim_y);
    let lo = spec.coupling_min.unwrap_or(spec.l_xy);
    let singular: Vec<f64> = (0..k)
        .map(|j| {
            if k == 1 || lo == spec.l_xy {
                spec.l_xy
            } else if lo == 0.0 {
                spec.l_xy * j as f64 / (k - 1) as f64
            } else {
                lo * (spec.l_xy / lo).powf(j as f64 / (k - 1) as f64)
            }
        })
        .collect();
    let u: DMatrix<T> = random_orthogonal(spec.dim_y, &mut rng);
    let v: DMatrix<T> = random_orthogonal(spec.dim_x, &mut rng);
    let s = DMatrix::from_diagonal(&DVector::from_iterator(
        k,
        singular.iter().map(|&x| T::lit(x)),
    ));
    let a = u.columns(0, k) * s * v.columns(0, k).transpose();

    let locals = scales
        .iter()
        .map(|&c| {
            Ok(LocalPair {
                f: shaped_quadratic(
                    spec.dim_x,
                    spec.mu_x * c,
                    spec.l_x * c,
                    spec.linear_scale,
                    &mut rng,
                )?,
                g: shaped_quadratic(
                    spec.dim_y,
                    spec.mu_y * c,
                    spec.l_y * c,
                    spec.linear_scale,
                    &mut rng,
                )?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SaddlePointProblem::new(locals, a, false, false)
}

//! Saddle-point problem instances
//!
//! ```text
//! min_x max_y  (1/n) Σ_i f_i(x) + yᵀA x − g_i(y)
//! ```
//!
//! with quadratic `f_i`, `g_i`, together with the first-order oracles the
//! solvers consume and the closed-form ground truth used to check them.

pub(crate) mod format;
mod ground_truth;
mod model;
pub(crate) mod oracle;
mod spectral;

pub use format::{generate, GeneratorSpec, ProblemFile};
pub use ground_truth::{solve_ground_truth, GroundTruth};
pub use model::{
    consensus_model_delta, consensus_model_of_f, consensus_model_of_g, ConsensusModel,
};
pub use oracle::{NoiseModel, StochasticOracleSpec, AGGREGATE_BATCH_THRESHOLD};
pub use spectral::{compute_spectral_constants, SpectralConstants};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{max_asymmetry, symmetric_eigenvalues};
use crate::Scalar;

/// `½ xᵀ P x + bᵀx + c` with declared strong-convexity and smoothness constants.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFunction<T: Scalar> {
    curvature: DMatrix<T>,
    linear: DVector<T>,
    offset: T,
    mu: T,
    smoothness: T,
}

const SYMMETRY_TOL: f64 = 1e-12;
const DECLARED_REL_TOL: f64 = 1e-9;

impl<T: Scalar> QuadraticFunction<T> {
    /// Builds the function with constants read off the spectrum of `curvature`.
    pub fn new(curvature: DMatrix<T>, linear: DVector<T>, offset: T) -> Result<Self> {
        Self::validate_shape(&curvature, &linear, offset)?;
        let ev = symmetric_eigenvalues(&curvature);
        let lo = ev[0].max(T::zero());
        let hi = ev[ev.len() - 1];
        Self::with_constants(curvature, linear, offset, lo, hi)
    }

    /// Builds the function with explicit constants, checked against the spectrum.
    pub fn with_constants(
        curvature: DMatrix<T>,
        linear: DVector<T>,
        offset: T,
        mu: T,
        smoothness: T,
    ) -> Result<Self> {
        Self::validate_shape(&curvature, &linear, offset)?;
        if !mu.is_finite_value() || !smoothness.is_finite_value() {
            return Err(Error::NonFinite("declared constants"));
        }
        if mu < T::zero() || smoothness <= T::zero() || mu > smoothness {
            return Err(Error::InvalidArgument(format!(
                "declared constants must satisfy 0 <= mu <= L, L > 0 (mu = {mu}, L = {smoothness})"
            )));
        }
        let ev = symmetric_eigenvalues(&curvature);
        let lo = ev[0];
        let hi = ev[ev.len() - 1];
        let rel = T::tol(DECLARED_REL_TOL);
        let scale = hi.abs().max(T::one());
        if lo < -rel * scale {
            return Err(Error::Invariant(format!(
                "curvature is not positive semidefinite (lambda_min = {lo})"
            )));
        }
        if mu > lo + rel * scale {
            return Err(Error::Invariant(format!(
                "declared mu = {mu} exceeds lambda_min = {lo}"
            )));
        }
        if smoothness < hi - rel * scale {
            return Err(Error::Invariant(format!(
                "declared L = {smoothness} below lambda_max = {hi}"
            )));
        }
        Ok(Self {
            curvature,
            linear,
            offset,
            mu,
            smoothness,
        })
    }

    fn validate_shape(curvature: &DMatrix<T>, linear: &DVector<T>, offset: T) -> Result<()> {
        if curvature.is_empty() {
            return Err(Error::Empty("curvature"));
        }
        check_dim("curvature columns", curvature.nrows(), curvature.ncols())?;
        check_dim("linear term", curvature.nrows(), linear.len())?;
        if !curvature.iter().all(|v| v.is_finite_value())
            || !linear.iter().all(|v| v.is_finite_value())
            || !offset.is_finite_value()
        {
            return Err(Error::NonFinite("quadratic function"));
        }
        let asym = max_asymmetry(curvature);
        if asym > T::tol(SYMMETRY_TOL) {
            return Err(Error::Invariant(format!("curvature asymmetric by {asym}")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn curvature(&self) -> &DMatrix<T> {
        &self.curvature
    }

    pub fn linear(&self) -> &DVector<T> {
        &self.linear
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn smoothness(&self) -> T {
        self.smoothness
    }

    pub fn value(&self, x: &DVector<T>) -> Result<T> {
        check_dim("point", self.dim(), x.len())?;
        Ok(self.value_unchecked(x))
    }

    pub(crate) fn value_unchecked(&self, x: &DVector<T>) -> T {
        let px = &self.curvature * x;
        T::lit(0.5) * x.dot(&px) + self.linear.dot(x) + self.offset
    }

    /// `P x + b`.
    pub fn gradient(&self, x: &DVector<T>) -> Result<DVector<T>> {
        check_dim("point", self.dim(), x.len())?;
        Ok(self.gradient_unchecked(x))
    }

    pub(crate) fn gradient_unchecked(&self, x: &DVector<T>) -> DVector<T> {
        &self.curvature * x + &self.linear
    }

    /// Bregman divergence `h(u) − h(v) − ⟨∇h(v), u − v⟩ = ½ (u−v)ᵀP(u−v)`.
    pub fn bregman(&self, u: &DVector<T>, v: &DVector<T>) -> Result<T> {
        check_dim("point", self.dim(), u.len())?;
        check_dim("point", self.dim(), v.len())?;
        Ok(self.bregman_unchecked(u, v))
    }

    pub(crate) fn bregman_unchecked(&self, u: &DVector<T>, v: &DVector<T>) -> T {
        let d = u - v;
        T::lit(0.5) * d.dot(&(&self.curvature * &d))
    }
}

/// The pair of local objectives held by one node.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPair<T: Scalar> {
    pub f: QuadraticFunction<T>,
    pub g: QuadraticFunction<T>,
}

/// Averaged constants `L_x = (1/n) Σ L_{x,i}` and so on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalConstants<T> {
    pub l_x: T,
    pub mu_x: T,
    pub l_y: T,
    pub mu_y: T,
}

/// Worst-case node constants: max smoothness, min strong convexity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalConstants<T> {
    pub l_lx: T,
    pub mu_lx: T,
    pub l_ly: T,
    pub mu_ly: T,
}

/// Everything the parameter rules and rate bounds need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants<T> {
    pub mu_x: T,
    pub l_x: T,
    pub mu_y: T,
    pub l_y: T,
    pub l_xy: T,
    pub mu_xy: T,
    pub mu_yx: T,
}

impl<T: Scalar> ModelConstants<T> {
    /// Constants seen by the averaged decentralized dynamics:
    /// smoothness doubled, strong convexity halved.
    pub fn hatted(&self) -> Self {
        let two = T::lit(2.0);
        Self {
            mu_x: self.mu_x / two,
            l_x: self.l_x * two,
            mu_y: self.mu_y / two,
            l_y: self.l_y * two,
            ..*self
        }
    }

    pub fn ones() -> Self {
        Self {
            mu_x: T::one(),
            l_x: T::one(),
            mu_y: T::one(),
            l_y: T::one(),
            l_xy: T::one(),
            mu_xy: T::one(),
            mu_yx: T::one(),
        }
    }
}

/// A decentralized bilinear saddle-point instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddlePointProblem<T: Scalar> {
    locals: Vec<LocalPair<T>>,
    coupling: DMatrix<T>,
    range_g_in_a: bool,
    range_f_in_at: bool,
    avg_f: QuadraticFunction<T>,
    avg_g: QuadraticFunction<T>,
}

impl<T: Scalar> SaddlePointProblem<T> {
    /// `coupling` is `d_y × d_x`. The range flags declare whether gradients of
    /// `g` lie in `range A` and gradients of `f` in `range Aᵀ`.
    pub fn new(
        locals: Vec<LocalPair<T>>,
        coupling: DMatrix<T>,
        range_g_in_a: bool,
        range_f_in_at: bool,
    ) -> Result<Self> {
        if locals.is_empty() {
            return Err(Error::Empty("node list"));
        }
        if coupling.is_empty() {
            return Err(Error::Empty("coupling matrix"));
        }
        if !coupling.iter().all(|v| v.is_finite_value()) {
            return Err(Error::NonFinite("coupling matrix"));
        }
        let (dy, dx) = coupling.shape();
        for pair in &locals {
            check_dim("f dimension", dx, pair.f.dim())?;
            check_dim("g dimension", dy, pair.g.dim())?;
        }
        if !locals.iter().any(|p| p.f.mu() > T::zero()) {
            return Err(Error::InvalidArgument(
                "no node has a strongly convex f_i".into(),
            ));
        }
        if !locals.iter().any(|p| p.g.mu() > T::zero()) {
            return Err(Error::InvalidArgument(
                "no node has a strongly convex g_i".into(),
            ));
        }
        let avg_f = average(locals.iter().map(|p| &p.f))?;
        let avg_g = average(locals.iter().map(|p| &p.g))?;
        Ok(Self {
            locals,
            coupling,
            range_g_in_a,
            range_f_in_at,
            avg_f,
            avg_g,
        })
    }

    pub fn n(&self) -> usize {
        self.locals.len()
    }

    pub fn dim_x(&self) -> usize {
        self.coupling.ncols()
    }

    pub fn dim_y(&self) -> usize {
        self.coupling.nrows()
    }

    pub fn coupling(&self) -> &DMatrix<T> {
        &self.coupling
    }

    pub fn locals(&self) -> &[LocalPair<T>] {
        &self.locals
    }

    pub fn node(&self, i: usize) -> Result<&LocalPair<T>> {
        self.locals.get(i).ok_or_else(|| {
            Error::InvalidArgument(format!("node index {i} out of range (n = {})", self.n()))
        })
    }

    pub fn range_flags(&self) -> (bool, bool) {
        (self.range_g_in_a, self.range_f_in_at)
    }

    /// `f = (1/n) Σ f_i` carrying the averaged constants.
    pub fn averaged_f(&self) -> &QuadraticFunction<T> {
        &self.avg_f
    }

    pub fn averaged_g(&self) -> &QuadraticFunction<T> {
        &self.avg_g
    }

    pub fn global_constants(&self) -> GlobalConstants<T> {
        GlobalConstants {
            l_x: self.avg_f.smoothness(),
            mu_x: self.avg_f.mu(),
            l_y: self.avg_g.smoothness(),
            mu_y: self.avg_g.mu(),
        }
    }

    pub fn local_constants(&self) -> LocalConstants<T> {
        let mut c = LocalConstants {
            l_lx: T::zero(),
            mu_lx: self.locals[0].f.mu(),
            l_ly: T::zero(),
            mu_ly: self.locals[0].g.mu(),
        };
        for p in &self.locals {
            c.l_lx = c.l_lx.max(p.f.smoothness());
            c.mu_lx = c.mu_lx.min(p.f.mu());
            c.l_ly = c.l_ly.max(p.g.smoothness());
            c.mu_ly = c.mu_ly.min(p.g.mu());
        }
        c
    }

    pub fn spectral(&self) -> Result<SpectralConstants<T>> {
        compute_spectral_constants(&self.coupling, self.range_g_in_a, self.range_f_in_at)
    }

    pub fn model_constants(&self) -> Result<ModelConstants<T>> {
        let g = self.global_constants();
        let s = self.spectral()?;
        Ok(ModelConstants {
            mu_x: g.mu_x,
            l_x: g.l_x,
            mu_y: g.mu_y,
            l_y: g.l_y,
            l_xy: s.l_xy,
            mu_xy: s.mu_xy,
            mu_yx: s.mu_yx,
        })
    }

    /// `∇f_i(x)`.
    pub fn exact_gradient_f(&self, node: usize, x: &DVector<T>) -> Result<DVector<T>> {
        self.node(node)?.f.gradient(x)
    }

    /// `∇g_i(y)`.
    pub fn exact_gradient_g(&self, node: usize, y: &DVector<T>) -> Result<DVector<T>> {
        self.node(node)?.g.gradient(y)
    }

    /// `(1/n)Σᵢ ∇f_i(x)`, the gradient of the averaged `f`.
    pub fn mean_gradient_f(&self, x: &DVector<T>) -> Result<DVector<T>> {
        check_dim("x", self.dim_x(), x.len())?;
        let mut acc = DVector::zeros(x.len());
        for p in &self.locals {
            acc += p.f.gradient_unchecked(x);
        }
        Ok(acc / T::count(self.n()))
    }

    pub fn mean_gradient_g(&self, y: &DVector<T>) -> Result<DVector<T>> {
        check_dim("y", self.dim_y(), y.len())?;
        let mut acc = DVector::zeros(y.len());
        for p in &self.locals {
            acc += p.g.gradient_unchecked(y);
        }
        Ok(acc / T::count(self.n()))
    }

    /// `∇F(X)`: column `i` is `∇f_i(x_i)`.
    pub fn stacked_gradient_f(&self, x: &DMatrix<T>) -> Result<DMatrix<T>> {
        check_dim("columns of X", self.n(), x.ncols())?;
        check_dim("rows of X", self.dim_x(), x.nrows())?;
        let mut out = DMatrix::zeros(x.nrows(), x.ncols());
        for (i, p) in self.locals.iter().enumerate() {
            out.set_column(i, &p.f.gradient_unchecked(&x.column(i).into_owned()));
        }
        Ok(out)
    }

    pub fn stacked_gradient_g(&self, y: &DMatrix<T>) -> Result<DMatrix<T>> {
        check_dim("columns of Y", self.n(), y.ncols())?;
        check_dim("rows of Y", self.dim_y(), y.nrows())?;
        let mut out = DMatrix::zeros(y.nrows(), y.ncols());
        for (i, p) in self.locals.iter().enumerate() {
            out.set_column(i, &p.g.gradient_unchecked(&y.column(i).into_owned()));
        }
        Ok(out)
    }

    /// Saddle objective `f(x) + yᵀA x − g(y)` of the averaged problem.
    pub fn objective(&self, x: &DVector<T>, y: &DVector<T>) -> Result<T> {
        check_dim("x", self.dim_x(), x.len())?;
        check_dim("y", self.dim_y(), y.len())?;
        Ok(self.avg_f.value_unchecked(x) + y.dot(&(&self.coupling * x))
            - self.avg_g.value_unchecked(y))
    }
}

fn average<'a, T: Scalar>(
    fs: impl Iterator<Item = &'a QuadraticFunction<T>>,
) -> Result<QuadraticFunction<T>> {
    let fs: Vec<_> = fs.collect();
    let n = T::count(fs.len());
    let d = fs[0].dim();
    let mut p = DMatrix::zeros(d, d);
    let mut b = DVector::zeros(d);
    let mut c = T::zero();
    let mut mu = T::zero();
    let mut l = T::zero();
    for f in &fs {
        p += f.curvature();
        b += f.linear();
        c += f.offset();
        mu += f.mu();
        l += f.smoothness();
    }
    p /= n;
    b /= n;
    // keep the average exactly symmetric
    let p = (&p + p.transpose()) * T::lit(0.5);
    QuadraticFunction::with_constants(p, b, c / n, mu / n, l / n)
}

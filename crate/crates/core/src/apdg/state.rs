use nalgebra::{DMatrix, DVector};

use super::ApdgParameters;
use crate::error::{check_dim, Error, Result};
use crate::linalg::range_projector;
use crate::problem::{GroundTruth, SaddlePointProblem};
use crate::Scalar;

/// Iterates of the centralized method.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState<T: Scalar> {
    pub x: DVector<T>,
    pub y: DVector<T>,
    pub x_f: DVector<T>,
    pub y_f: DVector<T>,
    pub y_prev: DVector<T>,
    pub k: usize,
}

impl<T: Scalar> SolverState<T> {
    /// Starts every sequence at `(x0, y0)`.
    pub fn at(x0: DVector<T>, y0: DVector<T>) -> Self {
        Self {
            x_f: x0.clone(),
            x: x0,
            y_f: y0.clone(),
            y_prev: y0.clone(),
            y: y0,
            k: 0,
        }
    }

    pub fn zeros(dim_x: usize, dim_y: usize) -> Self {
        Self::at(DVector::zeros(dim_x), DVector::zeros(dim_y))
    }

    /// Starts at the projection of `(x0, y0)` onto `range Aᵀ × range A` and
    /// reports the projection residual `max{‖x0 − Px0‖, ‖y0 − Py0‖}`. Points
    /// already in the ranges are kept bit for bit.
    pub fn projected(a: &DMatrix<T>, x0: DVector<T>, y0: DVector<T>) -> Result<(Self, T)> {
        check_dim("x0", a.ncols(), x0.len())?;
        check_dim("y0", a.nrows(), y0.len())?;
        let (x, rx) = project_or_keep(&range_projector(&a.transpose()), x0);
        let (y, ry) = project_or_keep(&range_projector(a), y0);
        Ok((Self::at(x, y), rx.max(ry)))
    }

    pub fn is_finite(&self) -> bool {
        [&self.x, &self.y, &self.x_f, &self.y_f, &self.y_prev]
            .iter()
            .all(|v| v.iter().all(|e| e.is_finite_value()))
    }
}

fn project_or_keep<T: Scalar>(p: &DMatrix<T>, v: DVector<T>) -> (DVector<T>, T) {
    let projected = p * &v;
    let residual = (&projected - &v).norm();
    if residual <= T::tol(1e-12) * (T::one() + v.norm()) {
        (v, residual)
    } else {
        (projected, residual)
    }
}

// Per-line updates, shared with the per-node columns of the decentralized
// method so both paths produce identical floating-point results.

pub(crate) fn extrapolate<T: Scalar>(y: &DVector<T>, y_prev: &DVector<T>, theta: T) -> DVector<T> {
    y + (y - y_prev) * theta
}

pub(crate) fn convex_mix<T: Scalar>(tau: T, a: &DVector<T>, b: &DVector<T>) -> DVector<T> {
    a * tau + b * (T::one() - tau)
}

pub(crate) fn primal_update<T: Scalar>(
    p: &ApdgParameters<T>,
    a: &DMatrix<T>,
    x: &DVector<T>,
    x_g: &DVector<T>,
    y_m: &DVector<T>,
    grad_f: &DVector<T>,
    grad_g: &DVector<T>,
) -> DVector<T> {
    let anchor = (x_g - x) * (p.eta_x * p.alpha_x);
    let coupling = a.tr_mul(&(a * x - grad_g)) * (p.eta_x * p.beta_x);
    let gradient = (grad_f + a.tr_mul(y_m)) * p.eta_x;
    x + anchor - coupling - gradient
}

pub(crate) fn dual_update<T: Scalar>(
    p: &ApdgParameters<T>,
    a: &DMatrix<T>,
    y: &DVector<T>,
    y_g: &DVector<T>,
    x_next: &DVector<T>,
    grad_f: &DVector<T>,
    grad_g: &DVector<T>,
) -> DVector<T> {
    let anchor = (y_g - y) * (p.eta_y * p.alpha_y);
    let coupling = a * (a.tr_mul(y) + grad_f) * (p.eta_y * p.beta_y);
    let gradient = (grad_g - a * x_next) * p.eta_y;
    y + anchor - coupling - gradient
}

pub(crate) fn follow<T: Scalar>(
    g: &DVector<T>,
    sigma: T,
    next: &DVector<T>,
    current: &DVector<T>,
) -> DVector<T> {
    g + (next - current) * sigma
}

/// Oracle query points of one step.
pub(crate) struct QueryPoints<T: Scalar> {
    pub y_m: DVector<T>,
    pub x_g: DVector<T>,
    pub y_g: DVector<T>,
}

pub(crate) fn query_points<T: Scalar>(s: &SolverState<T>, p: &ApdgParameters<T>) -> QueryPoints<T> {
    QueryPoints {
        y_m: extrapolate(&s.y, &s.y_prev, p.theta),
        x_g: convex_mix(p.tau_x, &s.x, &s.x_f),
        y_g: convex_mix(p.tau_y, &s.y, &s.y_f),
    }
}

/// Source of gradient estimates for the averaged objectives.
pub trait GradientOracle<T: Scalar> {
    /// Estimate of `∇f(x)` for iteration `k`. Called once per iteration.
    fn grad_f(&mut self, x: &DVector<T>, k: usize) -> Result<DVector<T>>;
    /// Estimate of `∇g(y)` for iteration `k`. Called once per iteration.
    fn grad_g(&mut self, y: &DVector<T>, k: usize) -> Result<DVector<T>>;
    /// Samples consumed per call, `(r_f, r_g)`.
    fn batch_sizes(&self) -> (usize, usize) {
        (1, 1)
    }
}

/// One iteration of the method.
pub fn apdg_step<T: Scalar, O: GradientOracle<T> + ?Sized>(
    state: &SolverState<T>,
    params: &ApdgParameters<T>,
    oracle: &mut O,
    a: &DMatrix<T>,
) -> Result<SolverState<T>> {
    check_dim("x", a.ncols(), state.x.len())?;
    check_dim("y", a.nrows(), state.y.len())?;
    let q = query_points(state, params);
    let grad_f = oracle.grad_f(&q.x_g, state.k)?;
    let grad_g = oracle.grad_g(&q.y_g, state.k)?;
    check_dim("f-gradient", a.ncols(), grad_f.len())?;
    check_dim("g-gradient", a.nrows(), grad_g.len())?;
    let x = primal_update(params, a, &state.x, &q.x_g, &q.y_m, &grad_f, &grad_g);
    let y = dual_update(params, a, &state.y, &q.y_g, &x, &grad_f, &grad_g);
    let next = SolverState {
        x_f: follow(&q.x_g, params.sigma_x, &x, &state.x),
        y_f: follow(&q.y_g, params.sigma_y, &y, &state.y),
        y_prev: state.y.clone(),
        x,
        y,
        k: state.k + 1,
    };
    if !next.is_finite() {
        return Err(Error::NonFinite("solver iterate"));
    }
    Ok(next)
}

/// Value of the Lyapunov function and its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovReport<T> {
    pub psi: T,
    /// `[x distance, y distance, f Bregman, g Bregman, momentum, cross]`.
    pub components: [T; 6],
    /// `(3/(4η_x))‖x − x*‖² + (1/η_y)‖y − y*‖²`, a lower bound on `psi`.
    pub lower_bound_check: T,
}

pub fn lyapunov<T: Scalar>(
    state: &SolverState<T>,
    params: &ApdgParameters<T>,
    truth: &GroundTruth<T>,
    problem: &SaddlePointProblem<T>,
) -> Result<LyapunovReport<T>> {
    check_dim("x", problem.dim_x(), state.x.len())?;
    check_dim("y", problem.dim_y(), state.y.len())?;
    check_dim("x_f", problem.dim_x(), state.x_f.len())?;
    check_dim("y_f", problem.dim_y(), state.y_f.len())?;
    check_dim("y_prev", problem.dim_y(), state.y_prev.len())?;
    check_dim("x*", problem.dim_x(), truth.x_star.len())?;
    check_dim("y*", problem.dim_y(), truth.y_star.len())?;
    let one = T::one();
    let two = T::lit(2.0);
    let dx = &state.x - &truth.x_star;
    let dy = &state.y - &truth.y_star;
    let dyy = &state.y - &state.y_prev;
    let dx2 = dx.norm_squared();
    let dy2 = dy.norm_squared();
    let components = [
        dx2 / params.eta_x,
        dy2 / params.eta_y,
        two / params.sigma_x
            * problem
                .averaged_f()
                .bregman_unchecked(&state.x_f, &truth.x_star),
        two / params.sigma_y
            * problem
                .averaged_g()
                .bregman_unchecked(&state.y_f, &truth.y_star),
        dyy.norm_squared() / (T::lit(4.0) * params.eta_y),
        -two * dyy.dot(&(problem.coupling() * &dx)),
    ];
    let psi = components.iter().fold(T::zero(), |a, &b| a + b);
    Ok(LyapunovReport {
        psi,
        components,
        lower_bound_check: T::lit(0.75) / params.eta_x * dx2 + one / params.eta_y * dy2,
    })
}

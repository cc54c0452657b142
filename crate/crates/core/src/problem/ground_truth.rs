use nalgebra::{DMatrix, DVector};

use super::SaddlePointProblem;
use crate::error::{Error, Result};
use crate::Scalar;

/// The unique saddle point of a strongly-convex-strongly-concave instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth<T: Scalar> {
    pub x_star: DVector<T>,
    pub y_star: DVector<T>,
    /// `max{‖∇f(x*) + Aᵀy*‖, ‖Ax* − ∇g(y*)‖}` after the solve.
    pub residual: T,
}

/// Solves `[P_f, Aᵀ; A, −P_g]·(x, y) = (−b_f, b_g)` directly, with one round of
/// iterative refinement.
pub fn solve_ground_truth<T: Scalar>(problem: &SaddlePointProblem<T>) -> Result<GroundTruth<T>> {
    let (dx, dy) = (problem.dim_x(), problem.dim_y());
    let f = problem.averaged_f();
    let g = problem.averaged_g();
    let a = problem.coupling();

    let mut kkt = DMatrix::zeros(dx + dy, dx + dy);
    kkt.view_mut((0, 0), (dx, dx)).copy_from(f.curvature());
    kkt.view_mut((0, dx), (dx, dy)).copy_from(&a.transpose());
    kkt.view_mut((dx, 0), (dy, dx)).copy_from(a);
    kkt.view_mut((dx, dx), (dy, dy))
        .copy_from(&(-g.curvature()));
    let mut rhs = DVector::zeros(dx + dy);
    rhs.rows_mut(0, dx).copy_from(&(-f.linear()));
    rhs.rows_mut(dx, dy).copy_from(g.linear());

    let lu = kkt.clone().lu();
    let mut sol = lu.solve(&rhs).ok_or(Error::SingularKkt)?;
    if !sol.iter().all(|v| v.is_finite_value()) {
        return Err(Error::SingularKkt);
    }
    let r = &rhs - &kkt * &sol;
    if let Some(c) = lu.solve(&r) {
        sol += c;
    }

    let x_star = sol.rows(0, dx).into_owned();
    let y_star = sol.rows(dx, dy).into_owned();
    let residual = kkt_residual(problem, &x_star, &y_star);
    let scale = T::one() + rhs.norm() + kkt.norm() * sol.norm();
    if !residual.is_finite_value() || residual > T::tol(1e-6) * scale {
        return Err(Error::SingularKkt);
    }
    Ok(GroundTruth {
        x_star,
        y_star,
        residual,
    })
}

pub(crate) fn kkt_residual<T: Scalar>(
    problem: &SaddlePointProblem<T>,
    x: &DVector<T>,
    y: &DVector<T>,
) -> T {
    let a = problem.coupling();
    let rx = problem.averaged_f().gradient_unchecked(x) + a.transpose() * y;
    let ry = a * x - problem.averaged_g().gradient_unchecked(y);
    rx.norm().max(ry.norm())
}

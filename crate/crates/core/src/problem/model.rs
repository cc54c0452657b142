use nalgebra::{DMatrix, DVector};

use super::{QuadraticFunction, SaddlePointProblem};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{column_mean, replicate};
use crate::Scalar;

/// Inexact first-order information about an averaged objective at the
/// consensus point `center`, assembled from per-node evaluations at the
/// columns of a non-consensual matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusModel<T: Scalar> {
    pub center: DVector<T>,
    pub value: T,
    pub gradient: DVector<T>,
    pub delta: T,
}

/// `δ = (1/(2n))·(L_l²/L_g + 2L_l²/µ_g + L_l − µ_l)·δ′`.
pub fn consensus_model_delta<T: Scalar>(
    n: usize,
    l_local: T,
    mu_local: T,
    l_global: T,
    mu_global: T,
    delta_prime: T,
) -> T {
    let two = T::lit(2.0);
    let ll2 = l_local * l_local;
    (ll2 / l_global + two * ll2 / mu_global + l_local - mu_local) * delta_prime
        / (two * T::count(n))
}

/// Model of `f = (1/n) Σ f_i` built from `X` (`d_x × n`). Valid as a
/// `(δ, 2L_x, µ_x/2)` model when `‖X − X̄‖² ≤ delta_prime`.
pub fn consensus_model_of_f<T: Scalar>(
    problem: &SaddlePointProblem<T>,
    x: &DMatrix<T>,
    delta_prime: T,
) -> Result<ConsensusModel<T>> {
    check_dim("rows of X", problem.dim_x(), x.nrows())?;
    let g = problem.global_constants();
    let l = problem.local_constants();
    build(
        problem.locals().iter().map(|p| &p.f).collect(),
        x,
        delta_prime,
        (l.l_lx, l.mu_lx, g.l_x, g.mu_x),
    )
}

/// Model of `g = (1/n) Σ g_i` built from `Y` (`d_y × n`).
pub fn consensus_model_of_g<T: Scalar>(
    problem: &SaddlePointProblem<T>,
    y: &DMatrix<T>,
    delta_prime: T,
) -> Result<ConsensusModel<T>> {
    check_dim("rows of Y", problem.dim_y(), y.nrows())?;
    let g = problem.global_constants();
    let l = problem.local_constants();
    build(
        problem.locals().iter().map(|p| &p.g).collect(),
        y,
        delta_prime,
        (l.l_ly, l.mu_ly, g.l_y, g.mu_y),
    )
}

fn build<T: Scalar>(
    fs: Vec<&QuadraticFunction<T>>,
    x: &DMatrix<T>,
    delta_prime: T,
    (l_local, mu_local, l_global, mu_global): (T, T, T, T),
) -> Result<ConsensusModel<T>> {
    let n = fs.len();
    check_dim("columns", n, x.ncols())?;
    if !delta_prime.is_finite_value() || delta_prime < T::zero() {
        return Err(Error::InvalidArgument(format!(
            "delta_prime must be finite and non-negative, got {delta_prime}"
        )));
    }
    if mu_global <= T::zero() {
        return Err(Error::InvalidArgument(
            "averaged strong convexity must be positive".into(),
        ));
    }
    let center = column_mean(x);
    let bar = replicate(&center, n);
    let spread = (&bar - x).norm_squared();
    let slack = T::tol(1e-12) * (T::one() + delta_prime);
    if spread > delta_prime + slack {
        return Err(Error::ConsensusPrecondition {
            error: spread.as_f64(),
            allowed: delta_prime.as_f64(),
        });
    }

    let nn = T::count(n);
    let mut value = T::zero();
    let mut gradient = DVector::zeros(x.nrows());
    for (i, f) in fs.iter().enumerate() {
        let xi = x.column(i).into_owned();
        let gi = f.gradient_unchecked(&xi);
        value += f.value_unchecked(&xi) + gi.dot(&(&center - &xi));
        gradient += gi;
    }
    let two = T::lit(2.0);
    let curv = (mu_local - two * l_local * l_local / mu_global) / two;
    value = (value + curv * spread) / nn;
    gradient /= nn;
    Ok(ConsensusModel {
        center,
        value,
        gradient,
        delta: consensus_model_delta(n, l_local, mu_local, l_global, mu_global, delta_prime),
    })
}

use nalgebra::DMatrix;

use super::MixingSchedule;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{max_asymmetry, spectral_norm};
use crate::Scalar;

/// `X ← X·W^{start+t}` for `t = 0..rounds`.
pub fn consensus<T: Scalar>(
    x: &DMatrix<T>,
    schedule: &MixingSchedule<T>,
    start: usize,
    rounds: usize,
) -> Result<DMatrix<T>> {
    check_dim("columns of X", schedule.n(), x.ncols())?;
    let mut out = x.clone();
    for t in 0..rounds {
        out = schedule.with_matrix(start + t, |w| &out * w);
    }
    Ok(out)
}

/// Degree-`rounds` Chebyshev acceleration of gossip with a static symmetric
/// `W`: applies `T_t(W/σ₂)/T_t(1/σ₂)` through the three-term recurrence,
/// with `σ₂ = ‖W − 11ᵀ/n‖₂`.
pub fn chebyshev_consensus<T: Scalar>(
    x: &DMatrix<T>,
    w: &DMatrix<T>,
    rounds: usize,
) -> Result<DMatrix<T>> {
    check_dim("mixing matrix columns", w.nrows(), w.ncols())?;
    check_dim("columns of X", w.nrows(), x.ncols())?;
    let asym = max_asymmetry(w);
    if asym > T::tol(1e-12) {
        return Err(Error::Invariant(format!(
            "Chebyshev consensus needs a symmetric mixing matrix (asymmetry {asym})"
        )));
    }
    if rounds == 0 {
        return Ok(x.clone());
    }
    let n = w.nrows();
    let avg = DMatrix::from_element(n, n, T::one() / T::count(n));
    let sigma = spectral_norm(&(w - avg));
    let first = x * w;
    if rounds == 1 || sigma <= T::tol(1e-14) {
        return Ok(first);
    }
    let two = T::lit(2.0);
    let mut c_prev = T::one();
    let mut c = T::one() / sigma;
    let mut prev = x.clone();
    let mut cur = first;
    for _ in 1..rounds {
        let c_next = two / sigma * c - c_prev;
        let next = &cur * w * (two * c / (sigma * c_next)) - &prev * (c_prev / c_next);
        prev = cur;
        cur = next;
        c_prev = c;
        c = c_next;
    }
    Ok(cur)
}

/// `⌈(τ/λ)·ln(D/δ′)⌉`, at least 0.
pub fn consensus_rounds_needed<T: Scalar>(
    spread: T,
    delta_prime: T,
    tau: usize,
    lambda: T,
) -> Result<usize> {
    if !(spread > T::zero()) || !(delta_prime > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "need D > 0 and delta' > 0 (D = {spread}, delta' = {delta_prime})"
        )));
    }
    if !(lambda > T::zero() && lambda <= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "lambda = {lambda} outside (0, 1]"
        )));
    }
    let t = (T::count(tau) / lambda * (spread / delta_prime).ln())
        .as_f64()
        .ceil();
    Ok(if t <= 0.0 { 0 } else { t as usize })
}

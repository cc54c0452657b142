use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, RANK_CUTOFF};
use crate::Scalar;

/// Extreme singular values of the coupling matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConstants<T> {
    pub l_xy: T,
    pub mu_xy: T,
    pub mu_yx: T,
    pub range_g_in_a: bool,
    pub range_f_in_at: bool,
}

/// `L_xy = √λ_max(AᵀA)`; `µ_yx` from `AᵀA`, `µ_xy` from `AAᵀ`, each using the
/// smallest positive eigenvalue when the matching range flag is set.
pub fn compute_spectral_constants<T: Scalar>(
    a: &DMatrix<T>,
    range_g_in_a: bool,
    range_f_in_at: bool,
) -> Result<SpectralConstants<T>> {
    if a.is_empty() {
        return Err(Error::Empty("coupling matrix"));
    }
    if !a.iter().all(|v| v.is_finite_value()) {
        return Err(Error::NonFinite("coupling matrix"));
    }
    let ata = a.transpose() * a;
    let aat = a * a.transpose();
    let ev_ata = symmetric_eigenvalues(&ata);
    let ev_aat = symmetric_eigenvalues(&aat);
    let top = ev_ata[ev_ata.len() - 1]
        .max(ev_aat[ev_aat.len() - 1])
        .max(T::zero());
    let cutoff = T::lit(RANK_CUTOFF) * top;
    let smallest = |ev: &[T], positive_only: bool| -> T {
        let lo = if positive_only {
            ev.iter()
                .copied()
                .find(|&v| v > cutoff)
                .unwrap_or(T::zero())
        } else {
            ev[0]
        };
        if lo <= cutoff {
            T::zero()
        } else {
            lo.min(top)
        }
    };
    let l_xy = top.sqrt();
    Ok(SpectralConstants {
        l_xy,
        mu_xy: smallest(&ev_aat, range_g_in_a).sqrt(),
        mu_yx: smallest(&ev_ata, range_f_in_at).sqrt(),
        range_g_in_a,
        range_f_in_at,
    })
}

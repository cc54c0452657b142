use nalgebra::DMatrix;
use serde::Serialize;

use super::MixingSchedule;
use crate::error::{Error, Result};
use crate::linalg::spectral_norm;
use crate::rng::SeedStreams;
use crate::Scalar;

/// Safety margin applied to sampled (non-analytic) certificates.
pub const TIME_VARYING_MARGIN: f64 = 0.05;

const PROBE_SEED: u64 = 0x5eed_c0de;
const PROBES_PER_WINDOW: usize = 4;

/// Evidence that every `tau`-round window contracts the distance to
/// consensus by at least `1 − lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate<T> {
    pub tau: usize,
    pub lambda: T,
    /// Largest contraction ratio observed (or proven, when `analytic`).
    pub worst_ratio: T,
    /// `true` for the exact spectral certificate of a static schedule.
    pub analytic: bool,
    /// `true` when every distinct window was checked (periodic schedules).
    pub exhaustive: bool,
    pub windows: usize,
    pub probes: usize,
}

/// Certifies `(tau, λ)` for a schedule.
///
/// Static schedules get `λ = 1 − σ₂(W)^τ` with `σ₂ = ‖W − 11ᵀ/n‖₂`. Other
/// schedules get `λ = (1 − r)(1 − 5%)` where `r` is the largest exact window
/// norm `‖W_τ − 11ᵀ/n‖₂` or random-probe ratio among the sampled windows;
/// periodic schedules check every distinct window, random ones the first
/// `trials`.
pub fn certify_contraction<T: Scalar>(
    schedule: &MixingSchedule<T>,
    tau: usize,
    trials: usize,
) -> Result<Certificate<T>> {
    if tau == 0 {
        return Err(Error::InvalidArgument(
            "window length tau must be at least 1".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "at least one trial is needed".into(),
        ));
    }
    let n = schedule.n();
    let avg = DMatrix::from_element(n, n, T::one() / T::count(n));
    if schedule.is_static() {
        let sigma2 = schedule.with_matrix(0, |w| spectral_norm(&(w - &avg)));
        let ratio = sigma2.powi(tau as i32);
        if ratio >= T::one() - T::tol(1e-12) {
            return Err(Error::NoContraction {
                ratio: ratio.as_f64(),
            });
        }
        return Ok(Certificate {
            tau,
            lambda: T::one() - ratio,
            worst_ratio: ratio,
            analytic: true,
            exhaustive: true,
            windows: 1,
            probes: 0,
        });
    }

    let (windows, exhaustive) = match schedule.period() {
        Some(p) => (p, true),
        None => (trials, false),
    };
    let mut rng = SeedStreams::new(PROBE_SEED).auxiliary(0);
    let mut worst = T::zero();
    for start in 0..windows {
        let product = schedule.window_product(start, tau);
        worst = worst.max(spectral_norm(&(&product - &avg)));
        for _ in 0..PROBES_PER_WINDOW {
            let x = DMatrix::<T>::from_fn(3, n, |_, _| T::standard_normal(&mut rng));
            let mean = DMatrix::from_fn(3, n, |i, _| x.row(i).sum() / T::count(n));
            let before = (&x - &mean).norm();
            if before > T::zero() {
                worst = worst.max((&x * &product - &mean).norm() / before);
            }
        }
    }
    if worst >= T::one() - T::tol(1e-12) {
        return Err(Error::NoContraction {
            ratio: worst.as_f64(),
        });
    }
    Ok(Certificate {
        tau,
        lambda: (T::one() - worst) * (T::one() - T::lit(TIME_VARYING_MARGIN)),
        worst_ratio: worst,
        analytic: false,
        exhaustive,
        windows,
        probes: windows * PROBES_PER_WINDOW,
    })
}

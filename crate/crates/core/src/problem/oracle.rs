use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SaddlePointProblem;
use crate::error::{check_dim, Error, Result};
use crate::Scalar;

/// Above this batch size the mean of the batch is drawn in one shot from its
/// exact distribution instead of summing individual samples.
pub const AGGREGATE_BATCH_THRESHOLD: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    #[default]
    GaussianIsotropic,
    None,
}

/// Per-node variance bounds of the stochastic gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticOracleSpec<T> {
    sigma_f2: Vec<T>,
    sigma_g2: Vec<T>,
    noise: NoiseModel,
}

impl<T: Scalar> StochasticOracleSpec<T> {
    pub fn new(sigma_f2: Vec<T>, sigma_g2: Vec<T>, noise: NoiseModel) -> Result<Self> {
        if sigma_f2.is_empty() {
            return Err(Error::Empty("variance list"));
        }
        check_dim("g variance list", sigma_f2.len(), sigma_g2.len())?;
        for &s in sigma_f2.iter().chain(&sigma_g2) {
            if !s.is_finite_value() {
                return Err(Error::NonFinite("variance bound"));
            }
            if s < T::zero() {
                return Err(Error::InvalidArgument(format!("negative variance {s}")));
            }
        }
        Ok(Self {
            sigma_f2,
            sigma_g2,
            noise,
        })
    }

    pub fn uniform(n: usize, sigma_f2: T, sigma_g2: T) -> Result<Self> {
        Self::new(
            vec![sigma_f2; n],
            vec![sigma_g2; n],
            NoiseModel::GaussianIsotropic,
        )
    }

    pub fn noiseless(n: usize) -> Self {
        Self {
            sigma_f2: vec![T::zero(); n],
            sigma_g2: vec![T::zero(); n],
            noise: NoiseModel::None,
        }
    }

    pub fn n(&self) -> usize {
        self.sigma_f2.len()
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }

    pub fn sigma_f2(&self) -> &[T] {
        &self.sigma_f2
    }

    pub fn sigma_g2(&self) -> &[T] {
        &self.sigma_g2
    }

    /// Effective per-sample variance at node `i` (zero when noise is off).
    pub fn node_sigma_f2(&self, i: usize) -> T {
        match self.noise {
            NoiseModel::None => T::zero(),
            NoiseModel::GaussianIsotropic => self.sigma_f2[i],
        }
    }

    pub fn node_sigma_g2(&self, i: usize) -> T {
        match self.noise {
            NoiseModel::None => T::zero(),
            NoiseModel::GaussianIsotropic => self.sigma_g2[i],
        }
    }

    /// `σ_f² = (1/n) Σ σ_{f,i}²`.
    pub fn global_sigma_f2(&self) -> T {
        mean(&self.sigma_f2)
    }

    pub fn global_sigma_g2(&self) -> T {
        mean(&self.sigma_g2)
    }
}

fn mean<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &b| a + b) / T::count(v.len())
}

/// Adds the mean of `batch` isotropic Gaussian noise vectors, each with
/// `E‖ξ‖² = sigma2`, to `exact`. Zero variance returns `exact` untouched and
/// draws nothing.
pub(crate) fn add_batched_noise<T: Scalar, R: Rng + ?Sized>(
    mut exact: DVector<T>,
    sigma2: T,
    batch: usize,
    rng: &mut R,
) -> DVector<T> {
    if sigma2 <= T::zero() {
        return exact;
    }
    let d = exact.len();
    let coord_sd = (sigma2 / T::count(d)).sqrt();
    if batch > AGGREGATE_BATCH_THRESHOLD {
        let sd = coord_sd / T::count(batch).sqrt();
        for v in exact.iter_mut() {
            *v += sd * T::standard_normal(rng);
        }
        return exact;
    }
    let mut acc = DVector::<T>::zeros(d);
    for _ in 0..batch {
        for v in acc.iter_mut() {
            *v += T::standard_normal(rng);
        }
    }
    let scale = coord_sd / T::count(batch);
    exact + acc * scale
}

impl<T: Scalar> SaddlePointProblem<T> {
    /// Mean of `batch` independent noisy evaluations of `∇f_i(x)`.
    pub fn stochastic_gradient_f<R: Rng + ?Sized>(
        &self,
        node: usize,
        x: &DVector<T>,
        spec: &StochasticOracleSpec<T>,
        rng: &mut R,
        batch: usize,
    ) -> Result<DVector<T>> {
        check_batch(spec, self.n(), batch)?;
        let exact = self.exact_gradient_f(node, x)?;
        Ok(add_batched_noise(
            exact,
            spec.node_sigma_f2(node),
            batch,
            rng,
        ))
    }

    pub fn stochastic_gradient_g<R: Rng + ?Sized>(
        &self,
        node: usize,
        y: &DVector<T>,
        spec: &StochasticOracleSpec<T>,
        rng: &mut R,
        batch: usize,
    ) -> Result<DVector<T>> {
        check_batch(spec, self.n(), batch)?;
        let exact = self.exact_gradient_g(node, y)?;
        Ok(add_batched_noise(
            exact,
            spec.node_sigma_g2(node),
            batch,
            rng,
        ))
    }
}

fn check_batch<T: Scalar>(spec: &StochasticOracleSpec<T>, n: usize, batch: usize) -> Result<()> {
    if batch == 0 {
        return Err(Error::InvalidArgument(
            "batch size must be at least 1".into(),
        ));
    }
    check_dim("variance list", n, spec.n())
}

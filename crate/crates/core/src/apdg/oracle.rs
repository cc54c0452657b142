use nalgebra::DVector;

use super::GradientOracle;
use crate::error::{check_dim, Result};
use crate::problem::oracle::add_batched_noise;
use crate::problem::SaddlePointProblem;
use crate::rng::{SeedStreams, StreamId, Variable};
use crate::Scalar;

/// Exact gradients of the averaged objectives.
#[derive(Debug, Clone, Copy)]
pub struct ExactOracle<'a, T: Scalar> {
    problem: &'a SaddlePointProblem<T>,
}

impl<'a, T: Scalar> ExactOracle<'a, T> {
    pub fn new(problem: &'a SaddlePointProblem<T>) -> Self {
        Self { problem }
    }
}

impl<T: Scalar> GradientOracle<T> for ExactOracle<'_, T> {
    fn grad_f(&mut self, x: &DVector<T>, _k: usize) -> Result<DVector<T>> {
        self.problem.mean_gradient_f(x)
    }

    fn grad_g(&mut self, y: &DVector<T>, _k: usize) -> Result<DVector<T>> {
        self.problem.mean_gradient_g(y)
    }
}

/// Batched noisy gradients of the averaged objectives. Iteration `k` draws
/// its f-noise from stream `(0, X, k)` and its g-noise from `(0, Y, k)`.
#[derive(Debug, Clone)]
pub struct StochasticOracle<'a, T: Scalar> {
    problem: &'a SaddlePointProblem<T>,
    sigma_f2: T,
    sigma_g2: T,
    streams: SeedStreams,
    batch_f: usize,
    batch_g: usize,
}

impl<'a, T: Scalar> StochasticOracle<'a, T> {
    pub fn new(
        problem: &'a SaddlePointProblem<T>,
        sigma_f2: T,
        sigma_g2: T,
        seed: u64,
        batch_f: usize,
        batch_g: usize,
    ) -> Self {
        Self {
            problem,
            sigma_f2,
            sigma_g2,
            streams: SeedStreams::new(seed),
            batch_f: batch_f.max(1),
            batch_g: batch_g.max(1),
        }
    }
}

impl<T: Scalar> GradientOracle<T> for StochasticOracle<'_, T> {
    fn grad_f(&mut self, x: &DVector<T>, k: usize) -> Result<DVector<T>> {
        let exact = self.problem.mean_gradient_f(x)?;
        let mut rng = self.streams.stream(StreamId::new(0, Variable::X, k));
        Ok(add_batched_noise(
            exact,
            self.sigma_f2,
            self.batch_f,
            &mut rng,
        ))
    }

    fn grad_g(&mut self, y: &DVector<T>, k: usize) -> Result<DVector<T>> {
        let exact = self.problem.mean_gradient_g(y)?;
        let mut rng = self.streams.stream(StreamId::new(0, Variable::Y, k));
        Ok(add_batched_noise(
            exact,
            self.sigma_g2,
            self.batch_g,
            &mut rng,
        ))
    }

    fn batch_sizes(&self) -> (usize, usize) {
        (self.batch_f, self.batch_g)
    }
}

/// Adds a fixed error vector to every gradient of an inner oracle.
///
/// A constant error `e` turns exact gradients of a `(µ, L)` function into a
/// `(‖e‖²(1/µ + 1/(2L)), 2L, µ/2)` model, see [`bias_model_delta`].
#[derive(Debug, Clone)]
pub struct BiasedOracle<O, T: Scalar> {
    inner: O,
    bias_f: DVector<T>,
    bias_g: DVector<T>,
}

impl<O, T: Scalar> BiasedOracle<O, T> {
    pub fn new(inner: O, bias_f: DVector<T>, bias_g: DVector<T>) -> Self {
        Self {
            inner,
            bias_f,
            bias_g,
        }
    }
}

impl<T: Scalar, O: GradientOracle<T>> GradientOracle<T> for BiasedOracle<O, T> {
    fn grad_f(&mut self, x: &DVector<T>, k: usize) -> Result<DVector<T>> {
        let g = self.inner.grad_f(x, k)?;
        check_dim("f bias", g.len(), self.bias_f.len())?;
        Ok(g + &self.bias_f)
    }

    fn grad_g(&mut self, y: &DVector<T>, k: usize) -> Result<DVector<T>> {
        let g = self.inner.grad_g(y, k)?;
        check_dim("g bias", g.len(), self.bias_g.len())?;
        Ok(g + &self.bias_g)
    }

    fn batch_sizes(&self) -> (usize, usize) {
        self.inner.batch_sizes()
    }
}

/// Model inexactness `δ = ‖e‖²(1/µ + 1/(2L))` of a constant gradient error.
pub fn bias_model_delta<T: Scalar>(bias_norm: T, mu: T, l: T) -> T {
    bias_norm * bias_norm * (T::one() / mu + T::one() / (T::lit(2.0) * l))
}

/// Norm of the constant error whose model inexactness equals `delta`.
pub fn bias_norm_for_delta<T: Scalar>(delta: T, mu: T, l: T) -> T {
    (delta / (T::one() / mu + T::one() / (T::lit(2.0) * l))).sqrt()
}

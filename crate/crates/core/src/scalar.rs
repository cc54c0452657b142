//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating-point scalar: `f32` or `f64`.
///
/// Linear algebra goes through nalgebra's [`RealField`]; conversions to and
/// from `f64` literals go through num-traits.
pub trait Scalar:
    RealField
    + Copy
    + FromPrimitive
    + ToPrimitive
    + Serialize
    + DeserializeOwned
    + Display
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant. Never fails for the supported types.
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).expect("finite scalar")
    }

    /// Widens an `f64` tolerance to something this precision can meet.
    fn tol(v: f64) -> Self;

    fn count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn is_finite_value(self) -> bool {
        self.as_f64().is_finite()
    }
}

impl Scalar for f64 {
    fn tol(v: f64) -> Self {
        v
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Scalar for f32 {
    fn tol(v: f64) -> Self {
        v.max(1e-5) as f32
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

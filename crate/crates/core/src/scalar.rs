//! Scalar abstractions shared by the numerical modules.
//!
//! [`Scalar`] only asks for field arithmetic and conversions, so the rational
//! correction-factor formulas run in `f32`, `f64` or [`DoubleDouble`].
//! [`Real`] adds the transcendental functions the likelihood needs.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{Float, FromPrimitive, One, ToPrimitive, Zero};

pub use crate::extended::DoubleDouble;

pub trait Scalar:
    Copy
    + Debug
    + PartialOrd
    + Zero
    + One
    + FromPrimitive
    + ToPrimitive
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics on NaN only, which never happens for literals.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal is representable")
    }

    fn int(k: i64) -> Self {
        Self::from_i64(k).expect("integer is representable")
    }

    /// `num / den` computed in the scalar's own precision.
    fn ratio(num: i64, den: i64) -> Self {
        Self::int(num) / Self::int(den)
    }

    fn to_real(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn square(self) -> Self {
        self * self
    }

    fn cube(self) -> Self {
        self * self * self
    }
}

impl<T> Scalar for T where
    T: Copy
        + Debug
        + PartialOrd
        + Zero
        + One
        + FromPrimitive
        + ToPrimitive
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
        + Neg<Output = T>
        + Send
        + Sync
        + 'static
{
}

/// A [`Scalar`] with `ln`, `exp` and friends: `f32` and `f64`.
pub trait Real: Scalar + Float {}

impl<T: Scalar + Float> Real for T {}

/// Converts an `f64` into any [`Real`].
#[inline]
pub(crate) fn real<F: Real>(x: f64) -> F {
    F::from_f64(x).unwrap_or_else(F::nan)
}

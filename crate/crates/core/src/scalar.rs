//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar used for probabilities, rates and exponents.
///
/// Implemented for `f32` and `f64`. The validation tolerance is scaled to the
/// precision of the type: probability vectors must sum to one within
/// [`Real::tolerance`].
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Tolerance for probability-sum and shift-structure checks.
    fn tolerance() -> Self;

    /// Lossy conversion from `f64`, used for literals.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    #[inline]
    fn tolerance() -> Self {
        1e-12
    }
}

impl Real for f32 {
    #[inline]
    fn tolerance() -> Self {
        1e-5
    }
}

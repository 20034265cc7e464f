//! Scalar abstraction so the whole pipeline runs on `f32` or `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar used for feature values, relevance scores and
/// classifier parameters. Implemented by `f32` and `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from `f64` (identity for `f64`, rounds for `f32`).
    fn cast(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts to scalar")
    }

    /// Conversion from a count.
    fn cast_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to scalar")
    }

    /// Value as `f64` (identity for `f64`).
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + Sum
        + Default
        + Debug
        + Display
        + Send
        + Sync
        + Serialize
        + DeserializeOwned
        + 'static
{
}

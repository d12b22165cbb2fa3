//! Scalar abstraction for the real-valued parts of the crate.
//!
//! Distributions, Hedge weights, audit margins and generalization bounds are
//! written against [`Scalar`] so they run in either `f32` or `f64`. Label
//! counts and combinatorial structures stay integral.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for the finite constants used in this crate.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    /// Absolute tolerance for a sum of `n` probabilities to differ from one.
    fn sum_tolerance(n: usize) -> Self;
}

impl Scalar for f64 {
    fn sum_tolerance(n: usize) -> Self {
        (4.0 * f64::EPSILON * n.max(1) as f64).max(1e-12)
    }
}

impl Scalar for f32 {
    fn sum_tolerance(n: usize) -> Self {
        4.0 * f32::EPSILON * n.max(1) as f32
    }
}

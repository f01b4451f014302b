//! Scalar abstraction for the floating-point parts of the crate.
//!
//! Scoring works on small integers; everything statistical (metrics, agreement,
//! feature gains, classifier parameters) is generic over [`Real`] so it can be
//! run in `f32` or `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used by metrics and the baseline classifiers.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + FromStr + Send + Sync + 'static
{
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable as float")
    }

    fn from_i64_lossy(n: i64) -> Self {
        Self::from_i64(n).expect("i64 representable as float")
    }

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 representable as float")
    }

    fn hundred() -> Self {
        Self::from_f64_lossy(100.0)
    }

    fn half() -> Self {
        Self::from_f64_lossy(0.5)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Arithmetic mean of a slice, `None` when empty.
pub fn mean<F: Real>(xs: &[F]) -> Option<F> {
    if xs.is_empty() {
        return None;
    }
    Some(xs.iter().copied().sum::<F>() / F::from_usize_lossy(xs.len()))
}

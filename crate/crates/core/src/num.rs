//! Scalar abstraction shared by the solver, operators and diagnostics.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the numerical core is generic over.
///
/// Implemented for `f32` and `f64`. Tolerances quoted throughout the crate
/// (round-trip errors, drift bounds) are stated for `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_index(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("index representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

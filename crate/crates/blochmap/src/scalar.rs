//! Scalar abstraction: every algorithm in this crate is generic over a real
//! floating-point type so the same code runs in `f32` and `f64`.

use core::fmt::{Debug, Display};
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar used throughout the crate.
///
/// Combines the `num-traits` capabilities the algorithms need: IEEE float
/// operations, mathematical constants, conversion to and from literals, and
/// assignment operators. Implemented for `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    ///
    /// Panics only if the value is not representable, which cannot happen
    /// for the finite literals used internally.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal must be representable")
    }

    /// Converts a `usize` (e.g. a sample count) into `Self`.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count must be representable")
    }

    /// Widens to `f64`, e.g. for diagnostic payloads in errors.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

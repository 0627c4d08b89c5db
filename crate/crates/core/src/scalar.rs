//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the library is generic over (`f32` or `f64`).
///
/// Extended-precision fallbacks always round-trip through `f64`, so any
/// implementor must convert losslessly to and from it.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Convert an `f64` literal. Never fails for the provided impls.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("finite scalar converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

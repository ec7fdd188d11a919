//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the library is generic over: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Display
    + LowerExp
    + Debug
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Convert an `f64` literal or intermediate into `Self`.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable in every Real type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::lit(n as f64)
    }

    /// Absolute tolerance used to validate orthonormality and normalisation
    /// invariants. 1e-10 in double precision, scaled by machine epsilon otherwise.
    fn structural_tol() -> Self {
        Self::lit(1e-10).max(Self::epsilon() * Self::lit(128.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

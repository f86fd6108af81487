//! Scalar abstraction shared by every numerical routine in the crate.

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Floating-point scalar the solvers are generic over.
///
/// Implemented for `f32` and `f64`. Tolerances are written as `f64`
/// literals and converted through [`tol`], which keeps them meaningful
/// for lower-precision types.
pub trait Real:
    'static
    + Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + LinalgScalar
    + ScalarOperand
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
{
    /// Converts an `f64` constant. Panics only for values the type cannot represent.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("constant not representable")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("count not representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Absolute tolerance `v`, floored at a small multiple of machine epsilon of `T`.
///
/// For `f64` every tolerance used in this crate is above the floor, so
/// the value passes through unchanged.
#[inline]
pub fn tol<T: Real>(v: f64) -> T {
    let floor = T::epsilon() * T::lit(64.0);
    T::lit(v).max(floor)
}

//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar the geometry, solver and controller are written against.
///
/// Implemented for `f32` and `f64`. Tolerances in this crate are expressed as
/// `f64` literals and converted through [`Real::of`].
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant into this scalar type.
    #[inline]
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 constant representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Sentinel used for absent bounds in `l <= Ax <= u` rows.
    #[inline]
    fn infinity_bound() -> Self {
        // 1e30 does not fit f32; clamp to its largest finite value there.
        Self::from_f64(1e30)
            .filter(|v| v.is_finite())
            .unwrap_or_else(Self::max_value)
    }
}

impl Real for f32 {}
impl Real for f64 {}

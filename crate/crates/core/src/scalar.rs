//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar usable for phase-space computations (`f32` or `f64`).
///
/// Tolerances throughout the crate are written for double precision. Types with
/// less precision raise every tolerance to [`Real::TOLERANCE_FLOOR`].
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + FloatConst + Debug + Display + Send + Sync + 'static
{
    /// Smallest absolute tolerance this type can meaningfully honor.
    const TOLERANCE_FLOOR: f64;

    /// Converts an `f64` literal. Panics only for values the type cannot represent at all.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// A tolerance, clamped from below by the type's precision floor.
    #[inline]
    fn tol(x: f64) -> Self {
        Self::lit(x.max(Self::TOLERANCE_FLOOR))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn finite(self) -> bool {
        self.as_f64().is_finite()
    }
}

impl Real for f64 {
    const TOLERANCE_FLOOR: f64 = 0.0;
}

impl Real for f32 {
    const TOLERANCE_FLOOR: f64 = 1e-4;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_floor_applies_to_single_precision() {
        assert_eq!(<f64 as Real>::tol(1e-10), 1e-10);
        assert_eq!(<f32 as Real>::tol(1e-10), 1e-4_f32);
        assert!(!<f64 as Real>::finite(f64::INFINITY));
    }
}

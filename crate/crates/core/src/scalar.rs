//! Scalar abstraction: every numeric routine in this crate is generic over a
//! real floating-point type implementing [`Scalar`].

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type backing all array, Fisher-information, and bound
/// computations: `f32` or `f64`.
///
/// Bundles nalgebra's [`RealField`] (matrix algebra) with the num-traits
/// conversions plus the complementary error function, which the standard
/// library does not provide.
pub trait Scalar: RealField + FromPrimitive + ToPrimitive + Copy {
    /// Complementary error function `erfc(x) = 1 - erf(x)`.
    fn erfc(self) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

impl Scalar for f32 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}

/// Shorthand for lifting an `f64` constant into the working scalar type.
#[inline]
pub(crate) fn from_f64<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant must convert into the scalar type")
}

/// Shorthand for lifting a count into the working scalar type.
#[inline]
pub(crate) fn from_usize<T: Scalar>(x: usize) -> T {
    T::from_usize(x).expect("usize must convert into the scalar type")
}

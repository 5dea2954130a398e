//! Stable evaluation of the scaled complementary error function and the
//! standard normal CDF.
//!
//! The one-bit Fisher weights need `exp(-x^2) / (Phi(x) Phi(-x))` at
//! arguments far into the Gaussian tail, where `erfc` underflows and the
//! naive quotient overflows. Everything here is phrased in terms of
//! `erfcx(x) = exp(x^2) erfc(x)`, which stays within the representable range
//! on the half-line.

use crate::scalar::{from_f64, Scalar};

/// Largest `t` for which both `exp(t^2)` and `erfc(t)` remain comfortably
/// inside the normal (non-denormal, non-overflowing) range of `T`.
pub(crate) fn product_cutoff<T: Scalar>() -> T {
    let max = T::max_value().expect("floating-point type must be bounded");
    (max.ln() * from_f64(0.9)).sqrt()
}

/// Scaled complementary error function `erfcx(x) = exp(x^2) erfc(x)`.
///
/// Decays like `1/(x sqrt(pi))` for large positive `x`; grows like
/// `2 exp(x^2)` for negative `x` and saturates to `+inf` once that
/// overflows.
pub fn erfcx<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        erfcx_nonneg(x)
    } else {
        // erfcx(-t) = 2 exp(t^2) - erfcx(t)
        let two: T = from_f64(2.0);
        two * (x * x).exp() - erfcx_nonneg(-x)
    }
}

/// `erfcx` restricted to `x >= 0`.
pub(crate) fn erfcx_nonneg<T: Scalar>(x: T) -> T {
    debug_assert!(x >= T::zero());
    if x <= product_cutoff::<T>() {
        (x * x).exp() * x.erfc()
    } else {
        erfcx_asymptotic(x)
    }
}

/// Asymptotic series `erfcx(x) ~ 1/(x sqrt(pi)) sum_k (-1)^k (2k-1)!!/(2x^2)^k`.
///
/// Only used beyond the `exp(x^2) erfc(x)` cutoff, where successive terms
/// shrink by more than two orders of magnitude and machine precision is
/// reached within a handful of terms.
fn erfcx_asymptotic<T: Scalar>(x: T) -> T {
    let half = from_f64(0.5);
    let inv_sqrt_pi = T::frac_2_sqrt_pi() * half;
    let z = (from_f64::<T>(2.0) * x * x).recip();
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..=12usize {
        term *= -z * from_f64(2.0 * k as f64 - 1.0);
        sum += term;
        if term.abs() < T::default_epsilon() * sum.abs() {
            break;
        }
    }
    inv_sqrt_pi / x * sum
}

/// Standard normal cumulative distribution function `Phi(x)`.
pub fn normal_cdf<T: Scalar>(x: T) -> T {
    let half: T = from_f64(0.5);
    half * (-x * from_f64(std::f64::consts::FRAC_1_SQRT_2)).erfc()
}

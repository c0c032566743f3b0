//! The scalar abstraction every algorithm in the crate is generic over.
//!
//! Two implementations ship: `f64` for fast paths where magnitudes stay
//! modest, and [`XReal`](super::XReal) (MPFR-backed, configurable mantissa,
//! exponent range about ±2^30) for everything that has to survive
//! quantities like `r^{-q}` with `q` in the thousands.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_complex::Complex;
use num_traits::Num;

/// A real field element with the transcendental functions the dynamics code needs.
///
/// Binary operations between values of different precision produce a result
/// at the larger of the two precisions. Constants built from `f64` use the
/// process-wide working precision of the type.
pub trait Real: Num + Neg<Output = Self> + Clone + PartialOrd + Debug + Display + Send + Sync + 'static {
    /// Converts from `f64` at the working precision.
    fn from_f64(x: f64) -> Self;
    fn from_i64(x: i64) -> Self;
    fn to_f64(&self) -> f64;

    /// Mantissa bits of values created by `from_f64`.
    fn working_bits() -> u32;

    /// Runs `f` with `bits` of working precision when the type supports it;
    /// fixed-precision types just run `f`.
    fn at_precision<R>(bits: u32, f: impl FnOnce() -> R) -> R {
        let _ = bits;
        f()
    }

    fn pi() -> Self;
    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn atan2(&self, x: &Self) -> Self;
    fn hypot(&self, other: &Self) -> Self;
    fn is_finite(&self) -> bool;
    fn is_zero_exact(&self) -> bool;

    /// Natural log of `|self|` as an `f64`; finite for any nonzero finite value
    /// even when the value itself would overflow an `f64`.
    fn ln_abs_f64(&self) -> f64 {
        self.abs().ln().to_f64()
    }

    /// `acc += x * y` on complex values. Implementations may fuse and avoid
    /// temporaries; the result must not depend on anything but the inputs.
    fn cmul_add(acc: &mut Complex<Self>, x: &Complex<Self>, y: &Complex<Self>) {
        let re = x.re.clone() * y.re.clone() - x.im.clone() * y.im.clone();
        let im = x.re.clone() * y.im.clone() + x.im.clone() * y.re.clone();
        acc.re = acc.re.clone() + re;
        acc.im = acc.im.clone() + im;
    }

    /// Relative unit roundoff `2^{-bits}` as an `f64`.
    fn unit_roundoff() -> f64 {
        (-(Self::working_bits() as f64)).exp2()
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_i64(x: i64) -> Self {
        x as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn working_bits() -> u32 {
        f64::MANTISSA_DIGITS
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn atan2(&self, x: &Self) -> Self {
        f64::atan2(*self, *x)
    }
    fn hypot(&self, other: &Self) -> Self {
        f64::hypot(*self, *other)
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn is_zero_exact(&self) -> bool {
        *self == 0.0
    }
    fn cmul_add(acc: &mut Complex<f64>, x: &Complex<f64>, y: &Complex<f64>) {
        acc.re += x.re * y.re - x.im * y.im;
        acc.im += x.re * y.im + x.im * y.re;
    }
}

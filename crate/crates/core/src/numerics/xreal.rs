//! MPFR-backed extended-precision real.

use std::cell::Cell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};

use num_complex::Complex;
use num_traits::{Num, One, Zero};
use rug::float::Constant;
use rug::Float;

use super::Real;

/// Default mantissa precision in bits.
pub const DEFAULT_PRECISION: u32 = 192;
/// Smallest mantissa precision accepted by the front end.
pub const MIN_PRECISION: u32 = 64;

static WORKING_PRECISION: AtomicU32 = AtomicU32::new(DEFAULT_PRECISION);

/// Sets the mantissa precision used for newly created [`XReal`] constants.
///
/// Meant to be called once at program start; values already constructed keep
/// their precision.
pub fn set_working_precision(bits: u32) {
    WORKING_PRECISION.store(bits.max(2), AtomicOrdering::SeqCst);
}

thread_local! {
    static SCOPED_PRECISION: Cell<Option<u32>> = const { Cell::new(None) };
}

/// Precision for new constants on this thread: the innermost
/// [`with_precision`] scope, else the process-wide setting.
pub fn working_precision() -> u32 {
    SCOPED_PRECISION.with(|c| c.get()).unwrap_or_else(|| WORKING_PRECISION.load(AtomicOrdering::SeqCst))
}

/// Runs `f` with the working precision raised (or lowered) to `bits` on the
/// current thread only.
pub fn with_precision<R>(bits: u32, f: impl FnOnce() -> R) -> R {
    struct Restore(Option<u32>);
    impl Drop for Restore {
        fn drop(&mut self) {
            SCOPED_PRECISION.with(|c| c.set(self.0));
        }
    }
    let _restore = Restore(SCOPED_PRECISION.with(|c| c.replace(Some(bits.max(2)))));
    f()
}

/// Extended-precision real number.
///
/// The exponent range is MPFR's default (about ±2^30); an overflow shows up as
/// a non-finite value, which callers turn into a range error.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct XReal(pub Float);

impl XReal {
    pub fn with_prec(x: f64, bits: u32) -> Self {
        XReal(Float::with_val(bits, x))
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Parses a decimal literal at the working precision.
    pub fn parse_decimal(s: &str) -> Option<Self> {
        let parsed = Float::parse(s.trim()).ok()?;
        Some(XReal(Float::with_val(working_precision(), parsed)))
    }

    /// Base-2 exponent of the value (0 for zero).
    pub fn exponent(&self) -> i32 {
        self.0.get_exp().unwrap_or(0)
    }
}

fn lifted(mut a: Float, b: &Float) -> Float {
    if a.prec() < b.prec() {
        a.set_prec(b.prec());
    }
    a
}

impl fmt::Debug for XReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.to_string_radix(10, Some(20)))
    }
}

impl fmt::Display for XReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.to_string_radix(10, Some(20)))
    }
}

impl Add for XReal {
    type Output = XReal;
    fn add(self, rhs: XReal) -> XReal {
        let mut a = lifted(self.0, &rhs.0);
        a += &rhs.0;
        XReal(a)
    }
}

impl Sub for XReal {
    type Output = XReal;
    fn sub(self, rhs: XReal) -> XReal {
        let mut a = lifted(self.0, &rhs.0);
        a -= &rhs.0;
        XReal(a)
    }
}

impl Mul for XReal {
    type Output = XReal;
    fn mul(self, rhs: XReal) -> XReal {
        let mut a = lifted(self.0, &rhs.0);
        a *= &rhs.0;
        XReal(a)
    }
}

impl Div for XReal {
    type Output = XReal;
    fn div(self, rhs: XReal) -> XReal {
        let mut a = lifted(self.0, &rhs.0);
        a /= &rhs.0;
        XReal(a)
    }
}

impl Rem for XReal {
    type Output = XReal;
    fn rem(self, rhs: XReal) -> XReal {
        let q = (self.clone() / rhs.clone()).0.trunc();
        self - XReal(q) * rhs
    }
}

impl Neg for XReal {
    type Output = XReal;
    fn neg(self) -> XReal {
        XReal(-self.0)
    }
}

impl Zero for XReal {
    fn zero() -> Self {
        XReal(Float::new(working_precision()))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for XReal {
    fn one() -> Self {
        XReal(Float::with_val(working_precision(), 1))
    }
}

impl Num for XReal {
    type FromStrRadixErr = rug::float::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        let parsed = Float::parse_radix(s, radix as i32)?;
        Ok(XReal(Float::with_val(working_precision(), parsed)))
    }
}

impl Real for XReal {
    fn from_f64(x: f64) -> Self {
        XReal(Float::with_val(working_precision(), x))
    }
    fn from_i64(x: i64) -> Self {
        XReal(Float::with_val(working_precision(), x))
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
    fn working_bits() -> u32 {
        working_precision()
    }
    fn at_precision<R>(bits: u32, f: impl FnOnce() -> R) -> R {
        with_precision(bits, f)
    }
    fn pi() -> Self {
        XReal(Float::with_val(working_precision(), Constant::Pi))
    }
    fn abs(&self) -> Self {
        XReal(self.0.clone().abs())
    }
    fn sqrt(&self) -> Self {
        XReal(self.0.clone().sqrt())
    }
    fn ln(&self) -> Self {
        XReal(self.0.clone().ln())
    }
    fn exp(&self) -> Self {
        XReal(self.0.clone().exp())
    }
    fn sin(&self) -> Self {
        XReal(self.0.clone().sin())
    }
    fn cos(&self) -> Self {
        XReal(self.0.clone().cos())
    }
    fn atan2(&self, x: &Self) -> Self {
        let y = lifted(self.0.clone(), &x.0);
        XReal(y.atan2(&x.0))
    }
    fn hypot(&self, other: &Self) -> Self {
        let y = lifted(self.0.clone(), &other.0);
        XReal(y.hypot(&other.0))
    }
    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }
    fn is_zero_exact(&self) -> bool {
        self.0.is_zero()
    }
    fn cmul_add(acc: &mut Complex<XReal>, x: &Complex<XReal>, y: &Complex<XReal>) {
        let p = x.re.prec().max(y.re.prec());
        if acc.re.prec() < p {
            acc.re.0.set_prec(p);
            acc.im.0.set_prec(p);
        }
        acc.re.0 += &x.re.0 * &y.re.0;
        acc.re.0 -= &x.im.0 * &y.im.0;
        acc.im.0 += &x.re.0 * &y.im.0;
        acc.im.0 += &x.im.0 * &y.re.0;
    }
}

impl PartialEq<f64> for XReal {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for XReal {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

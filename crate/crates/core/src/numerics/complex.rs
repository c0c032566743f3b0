//! Complex helpers over any [`Real`].
//!
//! `num_complex` supplies the field operations; the transcendental pieces here
//! are named with a `c` prefix so they never collide with the inherent
//! `Float`-bound methods of `Complex<f64>`.

use num_complex::Complex;
use num_traits::Zero;

use super::Real;

pub trait ComplexExt: Sized {
    type R: Real;
    fn from_real(x: Self::R) -> Self;
    fn from_f64s(re: f64, im: f64) -> Self;
    fn from_polar_t(r: &Self::R, theta: &Self::R) -> Self;
    /// `e^{2πi t}` for a real `t`.
    fn unit_turn(t: &Self::R) -> Self;
    fn cabs(&self) -> Self::R;
    fn carg(&self) -> Self::R;
    /// Principal branch logarithm.
    fn cln(&self) -> Self;
    fn cexp(&self) -> Self;
    /// Principal square root.
    fn csqrt(&self) -> Self;
    fn is_finite_c(&self) -> bool;
    fn to_c64(&self) -> Complex<f64>;
    fn from_c64(z: Complex<f64>) -> Self;
    /// Lexicographic order on (re, im).
    fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering;
}

impl<T: Real> ComplexExt for Complex<T> {
    type R = T;
    fn from_real(x: T) -> Self {
        Complex::new(x, T::zero())
    }

    fn from_f64s(re: f64, im: f64) -> Self {
        Complex::new(T::from_f64(re), T::from_f64(im))
    }

    fn from_polar_t(r: &T, theta: &T) -> Self {
        Complex::new(r.clone() * theta.cos(), r.clone() * theta.sin())
    }

    fn unit_turn(t: &T) -> Self {
        let theta = T::from_f64(2.0) * T::pi() * t.clone();
        Complex::new(theta.cos(), theta.sin())
    }

    fn cabs(&self) -> T {
        self.re.hypot(&self.im)
    }

    fn carg(&self) -> T {
        self.im.atan2(&self.re)
    }

    fn cln(&self) -> Self {
        Complex::new(self.cabs().ln(), self.carg())
    }

    fn cexp(&self) -> Self {
        let m = self.re.exp();
        Complex::new(m.clone() * self.im.cos(), m * self.im.sin())
    }

    fn csqrt(&self) -> Self {
        if self.re.is_zero() && self.im.is_zero() {
            return Complex::zero();
        }
        let two = T::from_f64(2.0);
        let r = self.cabs();
        // sqrt((r + |x|)/2) computed without cancellation, then the other part by division.
        let t = ((r + self.re.abs()) / two.clone()).sqrt();
        if self.re >= T::zero() {
            Complex::new(t.clone(), self.im.clone() / (two * t))
        } else {
            let im = if self.im >= T::zero() { t.clone() } else { -t.clone() };
            Complex::new(self.im.abs() / (two * t), im)
        }
    }

    fn is_finite_c(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    fn to_c64(&self) -> Complex<f64> {
        Complex::new(self.re.to_f64(), self.im.to_f64())
    }

    fn from_c64(z: Complex<f64>) -> Self {
        Complex::new(T::from_f64(z.re), T::from_f64(z.im))
    }

    fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::Equal;
        self.re.partial_cmp(&other.re).unwrap_or(Equal).then(self.im.partial_cmp(&other.im).unwrap_or(Equal))
    }
}

/// Converts a complex value between scalar types through `f64`.
pub fn convert<S: Real, T: Real>(z: &Complex<S>) -> Complex<T> {
    Complex::new(T::from_f64(z.re.to_f64()), T::from_f64(z.im.to_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::XReal;

    #[test]
    fn sqrt_branches() {
        for &(re, im) in &[(4.0, 0.0), (-4.0, 0.0), (0.0, 2.0), (-3.0, -4.0), (1e-20, -1.0)] {
            let z = Complex::<f64>::new(re, im);
            let s = z.csqrt();
            let back = s * s;
            assert!((back - z).norm() < 1e-12 * (1.0 + z.norm()), "{z}");
            assert!(s.re >= 0.0);
        }
    }

    #[test]
    fn log_exp_roundtrip_extended() {
        let z = Complex::<XReal>::from_f64s(-0.3, 0.8);
        let back = z.cln().cexp();
        assert!((back - z).cabs() < 1e-50);
    }
}

//! The family `f(z) = λz + az² + z³`: critical points, orbits, the Green
//! function and the Lyapunov exponent.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{convert, cubic_jet, ComplexExt, Jet, Real};

/// Iterations after which a non-escaping orbit is declared bounded.
pub const DEFAULT_ESCAPE_BUDGET: usize = 10_000;

/// Magnitude below which the `f64` fast path of [`green`] is used.
const HARDWARE_LIMIT: f64 = 1e100;

#[derive(Clone, Debug, PartialEq)]
pub struct CubicMap<T: Real> {
    pub lambda: Complex<T>,
    pub a: Complex<T>,
}

impl<T: Real> CubicMap<T> {
    pub fn new(lambda: Complex<T>, a: Complex<T>) -> Self {
        CubicMap { lambda, a }
    }

    pub fn eval(&self, z: &Complex<T>) -> Complex<T> {
        // ((z + a) z + λ) z
        ((z.clone() + self.a.clone()) * z.clone() + self.lambda.clone()) * z.clone()
    }

    pub fn derivative(&self, z: &Complex<T>) -> Complex<T> {
        let three = Complex::<T>::from_f64s(3.0, 0.0);
        let two = Complex::<T>::from_f64s(2.0, 0.0);
        (three * z.clone() + two * self.a.clone()) * z.clone() + self.lambda.clone()
    }

    pub fn jet(&self, order: usize) -> Result<Jet<T>> {
        cubic_jet(&self.lambda, &self.a, order)
    }

    /// `R = 2(1 + |a| + |λ|)`; beyond it `|f(z)| ≥ |z|²`, so orbits escape.
    pub fn escape_radius(&self) -> f64 {
        2.0 * (1.0 + self.a.cabs().to_f64() + self.lambda.cabs().to_f64())
    }

    pub fn to_f64(&self) -> CubicMap<f64> {
        CubicMap { lambda: convert(&self.lambda), a: convert(&self.a) }
    }

    /// The two roots of `3z² + 2az + λ`, as `(c₊, c₋)` with `c₊` the larger
    /// in lexicographic `(re, im)` order.
    pub fn critical_points(&self) -> (Complex<T>, Complex<T>) {
        let three = Complex::<T>::from_f64s(3.0, 0.0);
        let disc = (self.a.clone() * self.a.clone() - three.clone() * self.lambda.clone()).csqrt();
        // Pick the sign that avoids cancellation, then recover the other root
        // from the product c₊c₋ = λ/3.
        let plus = -self.a.clone() + disc.clone();
        let minus = -self.a.clone() - disc;
        let big = if plus.cabs() >= minus.cabs() { plus } else { minus };
        let (r1, r2) = if big.is_zero() {
            (Complex::zero(), Complex::zero())
        } else {
            let r1 = big / three.clone();
            let r2 = self.lambda.clone() / (three * r1.clone());
            (r1, r2)
        };
        if r1.lex_cmp(&r2) == std::cmp::Ordering::Less {
            (r2, r1)
        } else {
            (r1, r2)
        }
    }
}

impl CubicMap<f64> {
    pub fn lift<T: Real>(&self) -> CubicMap<T> {
        CubicMap { lambda: convert(&self.lambda), a: convert(&self.a) }
    }
}

/// A forward orbit, possibly cut short by escape.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRecord<T: Real> {
    pub samples: Vec<Complex<T>>,
    pub escaped_at: Option<usize>,
    pub escape_radius: f64,
}

/// Samples `z_0 = z0, …, z_n`, stopping at the first `k` with `|z_k| > R`.
pub fn iterate<T: Real>(f: &CubicMap<T>, z0: &Complex<T>, n: usize, escape_radius: f64) -> Result<OrbitRecord<T>> {
    let r = T::from_f64(escape_radius);
    let mut samples = Vec::with_capacity(n + 1);
    let mut z = z0.clone();
    let mut escaped_at = None;
    for k in 0..=n {
        if !z.is_finite_c() {
            return Err(Error::Range("iterate"));
        }
        samples.push(z.clone());
        if z.cabs() > r {
            escaped_at = Some(k);
            break;
        }
        if k < n {
            z = f.eval(&z);
        }
    }
    Ok(OrbitRecord { samples, escaped_at, escape_radius })
}

/// Which arithmetic evaluated a Green function value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArithmeticPath {
    Hardware,
    Extended,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenValue {
    pub value: f64,
    /// First index with `|z_k| > R`; `None` for the bounded verdict.
    pub escaped_at: Option<usize>,
    pub path: ArithmeticPath,
}

/// Green function `G(z) = lim 3^{-n} log|f^n(z)|` to absolute accuracy `tol`.
///
/// Once `|z_N| > R` the value is `3^{-N} log|z_N| + Σ_{j≥N} 3^{-(j+1)} log|1 + a/z_j + λ/z_j²|`,
/// summed until the remainder is below `tol/4`. An orbit that stays in the
/// disk of radius `R` for `budget` steps gets exactly 0, provided the a priori
/// bound `3^{-budget}·sup_{|w|≤R} G(w)` is itself below `tol`; otherwise the
/// verdict is [`Error::Undecided`].
pub fn green<T: Real>(f: &CubicMap<T>, z: &Complex<T>, tol: f64, budget: usize) -> Result<GreenValue> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Precondition(format!("green needs tol > 0, got {tol}")));
    }
    let modest = |w: &Complex<T>| w.cabs().to_f64() < HARDWARE_LIMIT;
    if modest(&f.lambda) && modest(&f.a) && modest(z) {
        green_with(&f.to_f64(), &convert::<T, f64>(z), tol, budget, ArithmeticPath::Hardware)
    } else {
        green_with(f, z, tol, budget, ArithmeticPath::Extended)
    }
}

fn green_with<T: Real>(
    f: &CubicMap<T>,
    z0: &Complex<T>,
    tol: f64,
    budget: usize,
    path: ArithmeticPath,
) -> Result<GreenValue> {
    let radius = f.escape_radius();
    let r = T::from_f64(radius);
    let mut z = z0.clone();
    for n in 0..=budget {
        if !z.is_finite_c() {
            return Err(Error::Range("green"));
        }
        if z.cabs() > r {
            let value = escaped_potential(f, z, n, tol, budget)?;
            return Ok(GreenValue { value, escaped_at: Some(n), path });
        }
        if n < budget {
            z = f.eval(&z);
        }
    }
    // sup over |w| ≤ R of G(w) ≤ (log R' + log 2)/3 with R' = |λ|R + |a|R² + R³.
    let r_image = f.lambda.cabs().to_f64() * radius + f.a.cabs().to_f64() * radius * radius + radius.powi(3);
    let sup = (r_image.ln() + std::f64::consts::LN_2) / 3.0;
    let bound = sup * (-(budget.min(2000) as f64) * 3f64.ln()).exp();
    if bound <= tol {
        Ok(GreenValue { value: 0.0, escaped_at: None, path })
    } else {
        Err(Error::Undecided { budget })
    }
}

fn escaped_potential<T: Real>(f: &CubicMap<T>, mut z: Complex<T>, n: usize, tol: f64, budget: usize) -> Result<f64> {
    let ln3 = 3f64.ln();
    let scale = |j: usize| (-(j as f64) * ln3).exp();
    let mut value = z.cabs().ln_abs_f64() * scale(n);
    let lam = f.lambda.cabs().to_f64();
    let a = f.a.cabs().to_f64();
    let one = Complex::<T>::one();
    for j in n..n + budget.max(64) {
        let mag = z.cabs().to_f64();
        // |ε_j| ≤ (|a| + |λ|/|z|)/|z|, and the remainder is at most 3^{-j}|ε_j|.
        let eps = if mag.is_finite() { (a + lam / mag) / mag } else { 0.0 };
        if scale(j) * eps < tol / 4.0 {
            return Ok(value);
        }
        let inv = one.clone() / z.clone();
        let ratio = one.clone() + f.a.clone() * inv.clone() + f.lambda.clone() * inv.clone() * inv;
        value += scale(j + 1) * ratio.cabs().ln_abs_f64();
        z = f.eval(&z);
        if !z.is_finite_c() {
            return Err(Error::Range("green"));
        }
    }
    Err(Error::Undecided { budget })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovValue {
    pub value: f64,
    pub green_plus: GreenValue,
    pub green_minus: GreenValue,
}

/// `L(f) = log 3 + G(c₊) + G(c₋)`, each Green value to accuracy `tol`.
pub fn lyapunov<T: Real>(f: &CubicMap<T>, tol: f64, budget: usize) -> Result<LyapunovValue> {
    let (cp, cm) = f.critical_points();
    let green_plus = green(f, &cp, tol, budget)?;
    let green_minus = green(f, &cm, tol, budget)?;
    Ok(LyapunovValue { value: 3f64.ln() + green_plus.value + green_minus.value, green_plus, green_minus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{XComplex, XReal, C64};

    fn map(lambda: C64, a: C64) -> CubicMap<f64> {
        CubicMap::new(lambda, a)
    }

    #[test]
    fn critical_points_closed_forms() {
        let f = map(C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        let (cp, cm) = f.critical_points();
        let s = 1.0 / 3f64.sqrt();
        assert!((cp - C64::new(0.0, s)).norm() < 1e-15);
        assert!((cm - C64::new(0.0, -s)).norm() < 1e-15);

        let lambda = C64::new(-0.3, 0.8);
        let f = map(lambda, C64::new(0.0, 0.0));
        let (cp, cm) = f.critical_points();
        let root = (-lambda / 3.0).sqrt();
        let ok = |c: C64| (c - root).norm() < 1e-14 || (c + root).norm() < 1e-14;
        assert!(ok(cp) && ok(cm) && (cp + cm).norm() < 1e-14);
    }

    #[test]
    fn double_critical_point() {
        let a = C64::new(1.2, -0.4);
        let f = map(a * a / 3.0, a);
        let (cp, cm) = f.critical_points();
        assert!((cp - (-a / 3.0)).norm() < 1e-7);
        assert!((cm - (-a / 3.0)).norm() < 1e-7);
    }

    #[test]
    fn vieta_extended() {
        let lambda = XComplex::unit_turn(&(XReal::from_f64(0.2)));
        let a = XComplex::from_f64s(0.7, -1.9);
        let f = CubicMap::new(lambda.clone(), a.clone());
        let (cp, cm) = f.critical_points();
        let three = XComplex::from_f64s(3.0, 0.0);
        let prod = cp.clone() * cm.clone() - lambda / three.clone();
        let sum = cp + cm + XComplex::from_f64s(2.0, 0.0) * a / three;
        let tol = XReal::from_f64(XReal::unit_roundoff() * 256.0);
        assert!(prod.cabs() <= tol.clone() && sum.cabs() <= tol);
    }

    #[test]
    fn orbit_basics() {
        let f = map(C64::new(0.5, 0.5), C64::new(0.2, 0.0));
        let o = iterate(&f, &C64::new(0.0, 0.0), 10, f.escape_radius()).unwrap();
        assert_eq!(o.samples.len(), 11);
        assert!(o.samples.iter().all(|z| *z == C64::new(0.0, 0.0)));
        let o = iterate(&f, &C64::new(1e8, 0.0), 10, f.escape_radius()).unwrap();
        assert_eq!(o.escaped_at, Some(0));
        assert_eq!(o.samples.len(), 1);
    }

    #[test]
    fn period_two_composition() {
        // λ = −1, a = 0: f(f(z)) = z − 2z³ + O(z⁵) in closed form (−(−z + z³) + (−z + z³)³).
        let f = map(C64::new(-1.0, 0.0), C64::new(0.0, 0.0));
        let z0 = C64::new(0.01, 0.02);
        let o = iterate(&f, &z0, 2, f.escape_radius()).unwrap();
        let w = -z0 + z0 * z0 * z0;
        let closed = -w + w * w * w;
        assert!((o.samples[2] - closed).norm() < 1e-16);
    }

    #[test]
    fn green_far_field() {
        let f = map(C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        for &m in &[1e4, 1e6, 1e8] {
            let g = green(&f, &C64::new(m, 0.0), 1e-9, DEFAULT_ESCAPE_BUDGET).unwrap();
            assert!((g.value - m.ln()).abs() < 1e-3);
            assert!(g.value >= 0.0);
        }
        assert_eq!(green(&f, &C64::new(0.0, 0.0), 1e-9, DEFAULT_ESCAPE_BUDGET).unwrap().value, 0.0);
    }

    #[test]
    fn green_functional_equation() {
        let f = map(C64::new(0.3, -0.7), C64::new(1.1, 0.4));
        let tol = 1e-8;
        for k in 0..20 {
            let t = k as f64 * 0.37;
            let z = C64::new(1.5 * t.cos(), 1.5 * t.sin());
            let g = green(&f, &z, tol, DEFAULT_ESCAPE_BUDGET).unwrap();
            let gf = green(&f, &f.eval(&z), tol, DEFAULT_ESCAPE_BUDGET).unwrap();
            if g.escaped_at.is_some() {
                assert!((gf.value - 3.0 * g.value).abs() <= 3.0 * tol + tol, "{} {}", gf.value, g.value);
            }
        }
    }

    #[test]
    fn green_extended_path_for_huge_inputs() {
        let f = CubicMap::new(XComplex::from_f64s(1.0, 0.0), XComplex::from_f64s(0.0, 0.0));
        let z = XComplex::new(XReal::parse_decimal("1e200").unwrap(), XReal::from_f64(0.0));
        let g = green(&f, &z, 1e-9, DEFAULT_ESCAPE_BUDGET).unwrap();
        assert_eq!(g.path, ArithmeticPath::Extended);
        assert!((g.value - 200.0 * 10f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn green_undecided_with_tiny_budget() {
        let f = map(C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        assert!(matches!(green(&f, &C64::new(0.1, 0.0), 1e-9, 3), Err(Error::Undecided { budget: 3 })));
        assert!(green(&f, &C64::new(0.1, 0.0), 0.0, 3).is_err());
    }

    #[test]
    fn lyapunov_bounded_and_far() {
        // Both critical points fixed at 0's basin: λ = 0.5 attracting, a = 0.
        let f = map(C64::new(0.5, 0.0), C64::new(0.0, 0.0));
        let l = lyapunov(&f, 1e-6, DEFAULT_ESCAPE_BUDGET).unwrap();
        assert!((l.value - 3f64.ln()).abs() <= 2e-6);

        // |a| = 10^4, λ = 1: c₋ ≈ −λ/(2a) stays near the parabolic point, c₊ ≈ −2a/3 escapes
        // with f(c₊) ≈ 4a³/27, so L − log 3 ≈ log|a| + log(4/27)/3.
        let a = 1e4;
        let f = map(C64::new(1.0, 0.0), C64::new(a, 0.0));
        let l = lyapunov(&f, 1e-9, DEFAULT_ESCAPE_BUDGET).unwrap();
        let expected = 3f64.ln() + a.ln() + (4.0f64 / 27.0).ln() / 3.0;
        assert!((l.value - expected).abs() < 1e-3, "{} vs {expected}", l.value);
        assert!(l.value >= 3f64.ln());
    }

    #[test]
    fn lyapunov_refinement_is_monotone() {
        let f = map(C64::new(0.6, 0.8), C64::new(1.9, 0.3));
        let tol = 1e-7;
        let coarse = lyapunov(&f, tol, 500).unwrap().value;
        let fine = lyapunov(&f, tol, 20_000).unwrap().value;
        assert!(fine >= coarse - tol);
    }
}

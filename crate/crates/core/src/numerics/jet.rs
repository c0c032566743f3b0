//! Truncated power series ("jets") with complex coefficients.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::{ComplexExt, Real};
use crate::error::{Error, Result};

/// Operand length at or above which [`mul_full`] switches from schoolbook
/// convolution to Karatsuba splitting.
///
/// Measured on 192-bit `XReal` jets (the ignored `karatsuba_crossover` test
/// prints the timings): below ~32 coefficients the extra additions of
/// the split cost more than the saved products. Results never depend on it.
pub const KARATSUBA_THRESHOLD: usize = 32;

/// A power series `c_0 + c_1 z + … + c_M z^M`, with everything of order
/// `M + 1` and above discarded.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<T: Real> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> Jet<T> {
    pub fn zero(order: usize) -> Self {
        Jet { coeffs: vec![Complex::zero(); order + 1] }
    }

    /// The jet of the identity map `z`.
    pub fn identity(order: usize) -> Self {
        let mut j = Self::zero(order);
        if order >= 1 {
            j.coeffs[1] = Complex::one();
        }
        j
    }

    pub fn constant(c: Complex<T>, order: usize) -> Self {
        let mut j = Self::zero(order);
        j.coeffs[0] = c;
        j
    }

    /// Builds a jet from coefficients `c_0..c_M`; the order is `len - 1`.
    pub fn from_coeffs(coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Precondition("a jet needs at least one coefficient".into()));
        }
        Ok(Jet { coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex<T> {
        self.coeffs.get(k).cloned().unwrap_or_else(Complex::zero)
    }

    pub fn into_coeffs(self) -> Vec<Complex<T>> {
        self.coeffs
    }

    /// Re-truncates (or zero-pads) to the given order.
    pub fn with_order(&self, order: usize) -> Self {
        let mut coeffs: Vec<_> = self.coeffs.iter().take(order + 1).cloned().collect();
        coeffs.resize(order + 1, Complex::zero());
        Jet { coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().max(other.order());
        let coeffs = (0..=order).map(|k| self.coeff(k) + other.coeff(k)).collect();
        Jet { coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let order = self.order().max(other.order());
        let coeffs = (0..=order).map(|k| self.coeff(k) - other.coeff(k)).collect();
        Jet { coeffs }
    }

    pub fn scale(&self, s: &Complex<T>) -> Self {
        Jet { coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect() }
    }

    /// Cauchy product truncated at `order`.
    pub fn mul(&self, other: &Self, order: usize) -> Result<Self> {
        let n = self.coeffs.len().min(order + 1);
        let m = other.coeffs.len().min(order + 1);
        let coeffs = mul_balanced(&self.coeffs[..n], &other.coeffs[..m], order + 1);
        Jet { coeffs }.checked("jet_mul")
    }

    /// `self ∘ inner` truncated at `order`, by Horner's rule in the jet algebra.
    pub fn compose(&self, inner: &Self, order: usize) -> Result<Self> {
        if !inner.coeffs[0].re.is_zero_exact() || !inner.coeffs[0].im.is_zero_exact() {
            return Err(Error::Precondition("inner jet must vanish at the origin for composition".into()));
        }
        let top = match self.coeffs.iter().rposition(|c| !c.is_zero()) {
            Some(k) => k.min(order),
            None => return Ok(Self::zero(order)),
        };
        let mut acc = Self::constant(self.coeffs[top].clone(), order);
        for k in (0..top).rev() {
            acc = acc.mul(inner, order)?;
            acc.coeffs[0] = acc.coeffs[0].clone() + self.coeffs[k].clone();
        }
        acc.checked("jet_compose")
    }

    /// Evaluates the truncated polynomial at `z`.
    pub fn eval(&self, z: &Complex<T>) -> Complex<T> {
        let mut acc = Complex::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * z.clone() + c.clone();
        }
        acc
    }

    /// Evaluates the polynomial and its derivative at `z`.
    pub fn eval_with_derivative(&self, z: &Complex<T>) -> (Complex<T>, Complex<T>) {
        let mut p: Complex<T> = Complex::zero();
        let mut dp: Complex<T> = Complex::zero();
        for c in self.coeffs.iter().rev() {
            dp = dp * z.clone() + p.clone();
            p = p * z.clone() + c.clone();
        }
        (p, dp)
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> T {
        self.coeffs.iter().map(|c| c.cabs()).fold(T::zero(), |m, x| if x > m { x } else { m })
    }

    fn checked(self, op: &'static str) -> Result<Self> {
        if self.coeffs.iter().all(|c| c.is_finite_c()) {
            Ok(self)
        } else {
            Err(Error::Range(op))
        }
    }
}

/// Coefficients `(0, λ, a, 1, 0, …)` of `λz + az² + z³` up to `order`.
pub fn cubic_jet<T: Real>(lambda: &Complex<T>, a: &Complex<T>, order: usize) -> Result<Jet<T>> {
    if order < 3 {
        return Err(Error::Precondition(format!("cubic jet needs order >= 3, got {order}")));
    }
    let mut j = Jet::zero(order);
    j.coeffs[1] = lambda.clone();
    j.coeffs[2] = a.clone();
    j.coeffs[3] = Complex::one();
    Ok(j)
}

/// Full product of two coefficient slices (length `x.len() + y.len() - 1`).
pub fn mul_full<T: Real>(x: &[Complex<T>], y: &[Complex<T>]) -> Vec<Complex<T>> {
    if x.is_empty() || y.is_empty() {
        return Vec::new();
    }
    if x.len().min(y.len()) < KARATSUBA_THRESHOLD {
        return mul_naive(x, y);
    }
    mul_karatsuba(x, y)
}

/// The first `len` coefficients of `x·y`, accurate coefficient by
/// coefficient.
///
/// Karatsuba's middle product mixes low- and high-order coefficients, so its
/// rounding error is relative to the largest coefficient of a block, not to the
/// coefficient being formed. Series growing like `R^{-k}` are first rescaled
/// `c_k ↦ c_k s^k` to remove the trend; if what remains still spans more than
/// `P/4` bits (polynomial humps, trailing zeros) the product falls back to a
/// truncated convolution. Structural zeros are kept exactly only on that path.
pub fn mul_balanced<T: Real>(x: &[Complex<T>], y: &[Complex<T>], len: usize) -> Vec<Complex<T>> {
    let x = &x[..effective_len(x).min(len)];
    let y = &y[..effective_len(y).min(len)];
    let mut out = if x.len().min(y.len()) < KARATSUBA_THRESHOLD {
        mul_truncated(x, y, len)
    } else {
        let slope = growth_slope(x, y).unwrap_or(0.0);
        let s = T::from_f64((-slope).exp());
        let xs = rescale(x, &s);
        let ys = rescale(y, &s);
        let allowance = T::working_bits() as f64 / 4.0;
        if span_bits(&xs) + span_bits(&ys) > allowance {
            mul_truncated(x, y, len)
        } else {
            let mut prod = mul_full(&xs, &ys);
            prod.truncate(len);
            rescale(&prod, &(T::one() / s))
        }
    };
    out.resize(len, Complex::zero());
    out
}

fn effective_len<T: Real>(c: &[Complex<T>]) -> usize {
    c.iter().rposition(|v| !v.is_zero()).map_or(0, |k| k + 1)
}

/// `log2(max|c| / min|c|)` over the nonzero coefficients.
fn span_bits<T: Real>(c: &[Complex<T>]) -> f64 {
    let (lo, hi) = c
        .iter()
        .filter(|v| !v.is_zero())
        .map(|v| v.cabs().ln_abs_f64())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| (lo.min(l), hi.max(l)));
    if hi >= lo {
        (hi - lo) / std::f64::consts::LN_2
    } else {
        0.0
    }
}

fn rescale<T: Real>(c: &[Complex<T>], s: &T) -> Vec<Complex<T>> {
    let mut p = T::one();
    c.iter()
        .map(|ck| {
            let out = Complex::new(ck.re.clone() * p.clone(), ck.im.clone() * p.clone());
            p = p.clone() * s.clone();
            out
        })
        .collect()
}

/// Least-squares slope of `log|c_k|` against `k` over the nonzero
/// coefficients of both operands.
fn growth_slope<T: Real>(x: &[Complex<T>], y: &[Complex<T>]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .enumerate()
        .chain(y.iter().enumerate())
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| (k as f64, c.cabs().ln_abs_f64()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Schoolbook convolution keeping only the first `len` coefficients.
pub fn mul_truncated<T: Real>(x: &[Complex<T>], y: &[Complex<T>], len: usize) -> Vec<Complex<T>> {
    let mut out = vec![Complex::zero(); len];
    for (k, acc) in out.iter_mut().enumerate() {
        let lo = (k + 1).saturating_sub(y.len());
        for i in lo..x.len().min(k + 1) {
            T::cmul_add(acc, &x[i], &y[k - i]);
        }
    }
    out
}

/// Schoolbook convolution.
pub fn mul_naive<T: Real>(x: &[Complex<T>], y: &[Complex<T>]) -> Vec<Complex<T>> {
    if x.is_empty() || y.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex::zero(); x.len() + y.len() - 1];
    for (i, xi) in x.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        for (j, yj) in y.iter().enumerate() {
            T::cmul_add(&mut out[i + j], xi, yj);
        }
    }
    out
}

fn mul_karatsuba<T: Real>(x: &[Complex<T>], y: &[Complex<T>]) -> Vec<Complex<T>> {
    let half = x.len().max(y.len()).div_ceil(2);
    let mut out = vec![Complex::zero(); x.len() + y.len() - 1];

    // Lopsided operands: split only the long one.
    if y.len() <= half || x.len() <= half {
        let (long, short) = if x.len() >= y.len() { (x, y) } else { (y, x) };
        for (start, chunk) in long.chunks(half).enumerate().map(|(i, c)| (i * half, c)) {
            for (k, c) in mul_full(chunk, short).into_iter().enumerate() {
                out[start + k] = out[start + k].clone() + c;
            }
        }
        return out;
    }

    let (x0, x1) = x.split_at(half);
    let (y0, y1) = y.split_at(half);
    let low = mul_full(x0, y0);
    let high = mul_full(x1, y1);
    let xs = add_slices(x0, x1);
    let ys = add_slices(y0, y1);
    let mut mid = mul_full(&xs, &ys);
    for (k, c) in low.iter().enumerate() {
        mid[k] = mid[k].clone() - c.clone();
    }
    for (k, c) in high.iter().enumerate() {
        mid[k] = mid[k].clone() - c.clone();
    }
    for (k, c) in low.into_iter().enumerate() {
        out[k] = out[k].clone() + c;
    }
    for (k, c) in mid.into_iter().enumerate() {
        if half + k < out.len() {
            out[half + k] = out[half + k].clone() + c;
        }
    }
    for (k, c) in high.into_iter().enumerate() {
        out[2 * half + k] = out[2 * half + k].clone() + c;
    }
    out
}

fn add_slices<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| match (a.get(k), b.get(k)) {
            (Some(u), Some(v)) => u.clone() + v.clone(),
            (Some(u), None) => u.clone(),
            (None, Some(v)) => v.clone(),
            (None, None) => unreachable!(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{XComplex, XReal};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn difference_of_squares() {
        let x = Jet::from_coeffs(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let y = Jet::from_coeffs(vec![c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let p = x.mul(&y, 2).unwrap();
        assert_eq!(p.coeffs(), &[c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    }

    #[test]
    fn zero_absorbs() {
        let x = Jet::from_coeffs(vec![c(1.0, 2.0), c(3.0, -1.0), c(0.5, 0.5)]).unwrap();
        let p = x.mul(&Jet::zero(2), 4).unwrap();
        assert_eq!(p, Jet::zero(4));
    }

    #[test]
    fn compose_hand_expansion() {
        let f = Jet::from_coeffs(vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let ff = f.compose(&f, 4).unwrap();
        let want = [1.0, 2.0, 2.0, 1.0];
        assert_eq!(ff.coeff(0), c(0.0, 0.0));
        for (k, w) in want.iter().enumerate() {
            assert_eq!(ff.coeff(k + 1), c(*w, 0.0));
        }
    }

    #[test]
    fn compose_identity_and_constant() {
        let inner = Jet::from_coeffs(vec![c(0.0, 0.0), c(2.0, 1.0), c(-1.0, 0.5), c(0.25, 0.0)]).unwrap();
        let id: Jet<f64> = Jet::identity(3);
        assert_eq!(id.compose(&inner, 3).unwrap(), inner);
        let k = Jet::constant(c(4.0, -2.0), 3);
        assert_eq!(k.compose(&inner, 3).unwrap(), Jet::constant(c(4.0, -2.0), 3));
    }

    #[test]
    fn compose_rejects_nonzero_constant_term() {
        let inner = Jet::from_coeffs(vec![c(0.1, 0.0), c(1.0, 0.0)]).unwrap();
        let id: Jet<f64> = Jet::identity(3);
        assert!(matches!(id.compose(&inner, 3), Err(Error::Precondition(_))));
    }

    #[test]
    fn cubic_jet_coefficients() {
        let j = cubic_jet(&c(1.0, 0.0), &c(0.0, 0.0), 5).unwrap();
        let want = [0.0, 1.0, 0.0, 1.0, 0.0, 0.0];
        for (k, w) in want.iter().enumerate() {
            assert_eq!(j.coeff(k), c(*w, 0.0));
        }
        let j = cubic_jet(&c(0.0, 1.0), &c(2.0, 0.0), 3).unwrap();
        assert_eq!(j.coeffs(), &[c(0.0, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(cubic_jet(&c(1.0, 0.0), &c(0.0, 0.0), 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn karatsuba_lopsided_matches_naive() {
        let x: Vec<_> = (0..100).map(|k| c((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let y: Vec<_> = (0..30).map(|k| c(1.0 / (k as f64 + 1.0), -(k as f64))).collect();
        let a = mul_full(&x, &y);
        let b = mul_naive(&x, &y);
        assert_eq!(a.len(), b.len());
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).norm() <= 1e-10 * (1.0 + v.norm()));
        }
    }

    #[test]
    fn balanced_product_keeps_relative_accuracy() {
        // Coefficients growing like 3^k: unbalanced Karatsuba loses the small
        // low-order outputs, the rescaled product must not.
        let x: Vec<XComplex> = (0..200)
            .map(|k| XComplex::from_f64s(3f64.powi(k) * (1.5 + (k as f64).cos()), 3f64.powi(k) * 0.5))
            .collect();
        let exact = mul_naive(&x, &x);
        let fast = mul_balanced(&x, &x, exact.len());
        for (k, (u, v)) in fast.iter().zip(&exact).enumerate() {
            let rel = ((u.clone() - v.clone()).cabs() / v.cabs()).to_f64();
            assert!(rel < 1e-45, "coefficient {k}: {rel:e}");
        }
    }

    #[test]
    #[ignore]
    fn karatsuba_crossover() {
        use std::time::Instant;
        for n in [8, 16, 24, 32, 48, 64, 128] {
            let x: Vec<XComplex> = (0..n).map(|k| XComplex::from_f64s(k as f64 * 0.1, 1.0)).collect();
            let reps = 2000 / n + 1;
            let t = Instant::now();
            for _ in 0..reps {
                std::hint::black_box(mul_naive(&x, &x));
            }
            let naive = t.elapsed() / reps as u32;
            let t = Instant::now();
            for _ in 0..reps {
                std::hint::black_box(mul_karatsuba(&x, &x));
            }
            let kara = t.elapsed() / reps as u32;
            println!("n={n:4} naive={naive:?} karatsuba={kara:?}");
        }
    }

    #[test]
    fn overflow_is_reported() {
        let big = Complex::new(XReal::parse_decimal("1e100000000").unwrap(), XReal::zero());
        let j = Jet::from_coeffs(vec![big.clone(), big]).unwrap();
        let sq = j.mul(&j, 1).unwrap();
        assert!(matches!(sq.mul(&sq, 1), Err(Error::Range("jet_mul"))));
    }
}

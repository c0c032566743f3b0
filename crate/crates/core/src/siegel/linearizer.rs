use num_complex::Complex;
use num_traits::{One, Zero};

use crate::cubic::CubicMap;
use crate::error::{Error, Result};
use crate::numerics::{ComplexExt, Jet, Real};

/// Default series order for conformal-radius work.
pub const DEFAULT_RADIUS_ORDER: usize = 1024;
/// Default series order for membership and capture tests.
pub const DEFAULT_MEMBERSHIP_ORDER: usize = 256;
/// Smallest order accepted by [`conformal_radius`].
pub const MIN_RADIUS_ORDER: usize = 64;

/// The inverse linearizer `ψ(w) = w + ψ_2 w² + …` of `f` at the origin,
/// solving `ψ(λw) = f(ψ(w))`, together with its conformal-radius estimate.
#[derive(Clone, Debug)]
pub struct LinearizationSeries<T: Real> {
    pub lambda: Complex<T>,
    pub a: Complex<T>,
    /// `ψ` as a jet of order `K`: `c_0 = 0`, `c_1 = 1`.
    pub psi: Jet<T>,
    /// Conformal radius estimate; `None` when `K` is too small to fit it.
    pub r_hat: Option<f64>,
    pub r_hat_err: Option<f64>,
    /// Smallest `|λ^k − λ|` met in the recursion.
    pub small_divisor_min: f64,
}

impl<T: Real> LinearizationSeries<T> {
    pub fn order(&self) -> usize {
        self.psi.order()
    }

    pub fn map(&self) -> CubicMap<T> {
        CubicMap::new(self.lambda.clone(), self.a.clone())
    }

    /// `ψ(w)` from the truncated series.
    pub fn psi_eval(&self, w: &Complex<T>) -> Complex<T> {
        self.psi.eval(w)
    }

    /// Radius, or a degenerate-series error when none could be fitted.
    pub fn radius(&self) -> Result<f64> {
        self.r_hat.ok_or_else(|| Error::Degenerate(format!("no conformal radius available at order {}", self.order())))
    }

    /// Largest coefficient `|[w^k](ψ(λw) − f(ψ(w)))|` over `k ≤ K`, computed
    /// through jet composition rather than the recursion.
    pub fn functional_residual(&self) -> Result<T> {
        let k = self.order();
        let f = self.map().jet(k.max(3))?;
        let rhs = f.compose(&self.psi, k)?;
        let mut lam_pow = Complex::<T>::one();
        let mut worst = T::zero();
        for (j, c) in self.psi.coeffs().iter().enumerate() {
            let d = (c.clone() * lam_pow.clone() - rhs.coeff(j)).cabs();
            if d > worst {
                worst = d;
            }
            lam_pow = lam_pow * self.lambda.clone();
        }
        Ok(worst)
    }
}

/// Computes `ψ_2..ψ_K` from `(λ^k − λ) ψ_k = [w^k](a ψ² + ψ³)`.
///
/// Fails with [`Error::Precision`] when some `|λ^k − λ|` (for `2 ≤ k ≤ K`)
/// drops below `2^{-P/2}`: the multiplier is too close to resonance for the
/// working precision.
pub fn linearizer<T: Real>(f: &CubicMap<T>, order: usize) -> Result<LinearizationSeries<T>> {
    if order < 1 {
        return Err(Error::Precondition("linearizer order must be >= 1".into()));
    }
    let floor = (-(T::working_bits() as f64) / 2.0).exp2();
    let mut psi: Vec<Complex<T>> = vec![Complex::zero(); order + 1];
    psi[1] = Complex::one();
    let mut sq: Vec<Complex<T>> = vec![Complex::zero(); order + 1];
    let mut lam_pow = f.lambda.clone();
    let mut small_divisor_min = f64::INFINITY;
    for k in 2..=order {
        lam_pow = lam_pow * f.lambda.clone();
        let mut s2 = Complex::zero();
        for i in 1..k {
            T::cmul_add(&mut s2, &psi[i], &psi[k - i]);
        }
        sq[k] = s2.clone();
        let mut s3 = Complex::zero();
        for i in 1..k.saturating_sub(1) {
            T::cmul_add(&mut s3, &psi[i], &sq[k - i]);
        }
        let divisor = lam_pow.clone() - f.lambda.clone();
        let size = divisor.cabs().to_f64();
        small_divisor_min = small_divisor_min.min(size);
        if size < floor {
            return Err(Error::Precision(format!(
                "small divisor |λ^{k} − λ| = {size:e} below 2^(-P/2); multiplier too close to resonance"
            )));
        }
        let numer = f.a.clone() * s2 + s3;
        psi[k] = numer / divisor;
        if !psi[k].is_finite_c() {
            return Err(Error::Range("linearizer"));
        }
    }
    let psi = Jet::from_coeffs(psi)?;
    let (r_hat, r_hat_err) = match conformal_radius_coeffs(psi.coeffs()) {
        Ok((r, e)) => (Some(r), Some(e)),
        Err(_) => (None, None),
    };
    Ok(LinearizationSeries { lambda: f.lambda.clone(), a: f.a.clone(), psi, r_hat, r_hat_err, small_divisor_min })
}

/// Conformal-radius estimate `(r_hat, r_hat_err)` of a linearization series.
pub fn conformal_radius<T: Real>(series: &LinearizationSeries<T>) -> Result<(f64, f64)> {
    conformal_radius_coeffs(series.psi.coeffs())
}

/// Hadamard estimate from coefficients `c_0..c_K`: `exp(−slope)` of the
/// least-squares line through `(k, log|c_k|)` over the top half `K/2 < k ≤ K`,
/// zero coefficients skipped. The error estimate compares against the same fit
/// on `c_0..c_{K/2}`.
pub fn conformal_radius_coeffs<T: Real>(coeffs: &[Complex<T>]) -> Result<(f64, f64)> {
    let k = coeffs.len().saturating_sub(1);
    if k < MIN_RADIUS_ORDER {
        return Err(Error::Precondition(format!("conformal radius needs order >= {MIN_RADIUS_ORDER}, got {k}")));
    }
    let full = hadamard_fit(coeffs, k)?;
    let half = hadamard_fit(coeffs, k / 2)?;
    Ok((full, (full - half).abs() / full))
}

fn hadamard_fit<T: Real>(coeffs: &[Complex<T>], top: usize) -> Result<f64> {
    let pts: Vec<(f64, f64)> = (top / 2 + 1..=top)
        .filter(|&j| !coeffs[j].is_zero())
        .map(|j| (j as f64, coeffs[j].cabs().ln_abs_f64()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Degenerate(format!("coefficients {}..={top} vanish; no growth rate to fit", top / 2 + 1)));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok((-sxy / sxx).exp())
}

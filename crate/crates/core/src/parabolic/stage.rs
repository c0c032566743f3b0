use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ComplexExt, Jet, Real};
use crate::rotation::Convergent;

/// The map at a rational multiplier `λ_n = e^{2πi p/q}`, reduced to its
/// parabolic normal form `f^{∘q}(z) = z + b z^{q+1} + O(z^{q+2})`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParabolicStage<T: Real> {
    pub n: usize,
    pub p: i128,
    pub q: i128,
    pub lambda: Complex<T>,
    pub a: Complex<T>,
    pub b: Complex<T>,
    /// `max_{2≤j≤q} |[z^j] f^{∘q}| / S_j`, where `S_j` is the largest
    /// `|[z^k]|`, `k ≤ j`, met among the intermediate iterates and their
    /// square and cube terms. Zero when every such coefficient vanished
    /// exactly.
    pub residual: f64,
    /// `S_{q+1}`: the size of the terms that cancel down to `b`.
    pub b_scale: T,
    /// Mantissa bits the iterate was computed with.
    pub bits: u32,
    /// `b` from the formal normal form, an independent cross-check.
    pub b_normal_form: Option<Complex<T>>,
}

/// Summary of a stage in plain floats, for tables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub n: usize,
    pub p: i128,
    pub q: i128,
    /// `log|b|`, `-inf` for an exact zero.
    pub log_abs_b: f64,
    /// `arg b / π`.
    pub arg_b_over_pi: f64,
    pub residual: f64,
    pub bits: u32,
}

impl<T: Real> ParabolicStage<T> {
    pub fn summary(&self) -> StageSummary {
        StageSummary {
            n: self.n,
            p: self.p,
            q: self.q,
            log_abs_b: self.b.cabs().ln_abs_f64(),
            arg_b_over_pi: self.b.carg().to_f64() / std::f64::consts::PI,
            residual: self.residual,
            bits: self.bits,
        }
    }

    /// `(1/q) log|b|`.
    pub fn root_growth(&self) -> f64 {
        self.b.cabs().ln_abs_f64() / self.q as f64
    }

    /// `|b| ≤ 2^{-P/2} S_{q+1}` at the stage's own precision `P`: fewer than
    /// half the mantissa bits of `b` survive the cancellation, so `b` is
    /// treated as zero.
    pub fn b_is_negligible(&self) -> bool {
        let tol = T::from_f64((-(self.bits as f64) / 2.0).exp2());
        self.b.cabs() <= tol * self.b_scale.clone()
    }
}

/// `e^{2πi p/q}` at working precision.
pub fn rational_multiplier<T: Real>(p: i128, q: i128) -> Result<Complex<T>> {
    if q <= 0 {
        return Err(Error::Precondition(format!("denominator must be positive, got {q}")));
    }
    // Reduce p mod q first so the angle stays small and exact.
    let r = p.rem_euclid(q);
    let (r, q) = (i64::try_from(r), i64::try_from(q));
    match (r, q) {
        (Ok(r), Ok(q)) => Ok(Complex::unit_turn(&(T::from_i64(r) / T::from_i64(q)))),
        _ => Err(Error::Range("rational_multiplier")),
    }
}

/// Default ceiling for the precision escalation in [`stage_for`].
pub const DEFAULT_MAX_STAGE_BITS: u32 = 2048;

/// Stage for convergent `c` at parameter `a`, with enough precision for `b`.
///
/// The terms that cancel down to `b` grow faster than `b` itself (about
/// `2^{0.3 q}` times larger for golden-mean stages), so beyond `q ≈ 300` the
/// default precision cannot resolve `b`. The normal-form value predicts the
/// loss `L` in bits; the iterate is then recomputed at `2L + 64` bits so that
/// `b` keeps at least half its mantissa, up to `max_bits` (else
/// [`Error::Precision`]). Stages where `b` vanishes by
/// symmetry or per the normal form are returned as computed, with
/// [`ParabolicStage::b_is_negligible`] set.
pub fn stage_for<T: Real>(c: &Convergent, a: &Complex<T>, max_bits: u32) -> Result<ParabolicStage<T>> {
    let lambda = rational_multiplier::<T>(c.p, c.q)?;
    let nf = b_normal_form(&lambda, a, c.q)?;
    let mut s = b_n_compute(&lambda, a, c.q)?;
    let bits = T::working_bits();
    if s.b_is_negligible() && !parity_forced_zero(a, c.q) && !nf.is_negligible() {
        let lost = (s.b_scale.ln_abs_f64() - nf.b.cabs().ln_abs_f64()) / std::f64::consts::LN_2;
        let need = ((2.0 * lost.max(0.0) + 64.0) / 64.0).ceil() as u32 * 64;
        if need > max_bits || need <= bits {
            return Err(Error::Precision(format!(
                "q = {}: b needs about {need} bits (cancellation of {lost:.0} bits), limit is {max_bits}",
                c.q
            )));
        }
        s = T::at_precision(need, || {
            let lambda = rational_multiplier::<T>(c.p, c.q)?;
            b_n_compute(&lambda, a, c.q)
        })?;
    }
    s.n = c.n;
    s.p = c.p;
    s.b_normal_form = Some(nf.b);
    Ok(s)
}

/// `b` read off the formal normal form.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormCoefficient<T: Real> {
    pub b: Complex<T>,
    /// Largest term in the sum that forms the resonant coefficient.
    pub scale: T,
}

impl<T: Real> NormalFormCoefficient<T> {
    pub fn is_negligible(&self) -> bool {
        let tol = T::from_f64((-(T::working_bits() as f64) / 2.0).exp2());
        self.b.cabs() <= tol * self.scale.clone()
    }
}

/// `b` without iterating: conjugate `f` by `h(w) = w + Σ_{k=2}^{q} h_k w^k`
/// to `g(w) = λw + β w^{q+1} + …`, where `(λ^k − λ) h_k = [w^k](a h² + h³)`
/// and `β = [w^{q+1}](a h² + h³)`. Then `g^{∘q}(w) = w + qβλ^{-1} w^{q+1} + …`
/// and the leading coefficient is a conjugacy invariant, so `b = qβ/λ`.
///
/// `O(q²)` work with no large cancellation, which makes it the cheap route
/// for grids and a check on [`b_n_compute`].
pub fn b_normal_form<T: Real>(lambda: &Complex<T>, a: &Complex<T>, q: i128) -> Result<NormalFormCoefficient<T>> {
    let qq = usize::try_from(q)
        .ok()
        .filter(|&q| q >= 1)
        .ok_or_else(|| Error::Precondition(format!("q must be a positive integer, got {q}")))?;
    check_primitive_root(lambda, qq)?;
    let mut h: Vec<Complex<T>> = vec![Complex::zero(); qq + 2];
    h[1] = Complex::one();
    let mut sq: Vec<Complex<T>> = vec![Complex::zero(); qq + 2];
    let mut lam_pow = lambda.clone();
    for k in 2..=qq + 1 {
        lam_pow = lam_pow * lambda.clone();
        let mut s2 = Complex::zero();
        for i in 1..k {
            T::cmul_add(&mut s2, &h[i], &h[k - i]);
        }
        sq[k] = s2.clone();
        let mut s3 = Complex::zero();
        for i in 1..k.saturating_sub(1) {
            T::cmul_add(&mut s3, &h[i], &sq[k - i]);
        }
        let quad = a.clone() * s2;
        if k == qq + 1 {
            let scale = if quad.cabs() > s3.cabs() { quad.cabs() } else { s3.cabs() };
            let beta = quad + s3;
            let b = beta * Complex::from_real(T::from_i64(qq as i64)) / lambda.clone();
            if !b.is_finite_c() {
                return Err(Error::Range("b_normal_form"));
            }
            return Ok(NormalFormCoefficient { b, scale });
        }
        h[k] = (quad + s3) / (lam_pow.clone() - lambda.clone());
    }
    unreachable!("loop returns at k = q + 1")
}

/// Jet of `f^{∘q}` to order `q + 1` by `q` successive applications of
/// `J ↦ λJ + aJ² + J³`, reading `b` off the `z^{q+1}` coefficient.
///
/// Cost: `2q` truncated products of length `q + 2`, i.e. `O(q^{2.58})`
/// coefficient operations with Karatsuba. `q = 610` takes seconds at 192 bits.
///
/// Fails with [`Error::Precondition`] unless `λ^q = 1` with `λ^j ≠ 1` for
/// `0 < j < q` (to `2^{-P/2}`), and with [`Error::Structural`] when the
/// normal-form residual exceeds `2^{-P/2}`.
pub fn b_n_compute<T: Real>(lambda: &Complex<T>, a: &Complex<T>, q: i128) -> Result<ParabolicStage<T>> {
    let qq = usize::try_from(q)
        .ok()
        .filter(|&q| q >= 1)
        .ok_or_else(|| Error::Precondition(format!("q must be a positive integer, got {q}")))?;
    check_primitive_root(lambda, qq)?;
    let order = qq + 1;
    let mut jet = Jet::<T>::identity(order);
    let mut scale = vec![T::zero(); order + 1];
    for _ in 0..qq {
        let sq = jet.mul(&jet, order)?;
        let cube = sq.mul(&jet, order)?;
        let quad = sq.scale(a);
        note(&quad, &mut scale);
        note(&cube, &mut scale);
        jet = jet.scale(lambda).add(&quad).add(&cube);
        note(&jet, &mut scale);
    }
    if !jet.coeffs().iter().all(|c| c.is_finite_c()) {
        return Err(Error::Range("b_n_compute"));
    }
    // Products below the Karatsuba threshold keep structural zeros exact,
    // larger ones leave rounding noise in them; a running maximum keeps the
    // normalization meaningful in either case.
    for j in 1..scale.len() {
        if scale[j - 1] > scale[j] {
            scale[j] = scale[j - 1].clone();
        }
    }
    let mut residual = 0.0_f64;
    for (c, s) in jet.coeffs()[2..=qq].iter().zip(&scale[2..=qq]) {
        let c = c.cabs();
        if c.is_zero() {
            continue;
        }
        residual = residual.max((c / s.clone()).to_f64());
    }
    let tol = (-(T::working_bits() as f64) / 2.0).exp2();
    let one_err = (jet.coeff(1) - Complex::one()).cabs().to_f64();
    if residual > tol || one_err > tol {
        return Err(Error::Structural(format!(
            "q-fold iterate is not in parabolic normal form: residual {residual:e}, |f'(0)^q − 1| = {one_err:e}"
        )));
    }
    Ok(ParabolicStage {
        n: 0,
        p: 0,
        q,
        lambda: lambda.clone(),
        a: a.clone(),
        b: jet.coeff(order),
        residual,
        b_scale: scale[order].clone(),
        bits: T::working_bits(),
        b_normal_form: None,
    })
}

fn note<T: Real>(j: &Jet<T>, scale: &mut [T]) {
    for (s, c) in scale.iter_mut().zip(j.coeffs()) {
        let m = c.cabs();
        if m > *s {
            *s = m;
        }
    }
}

fn check_primitive_root<T: Real>(lambda: &Complex<T>, q: usize) -> Result<()> {
    let tol = T::from_f64((-(T::working_bits() as f64) / 2.0).exp2());
    let one = Complex::<T>::one();
    let mut pow = one.clone();
    for j in 1..=q {
        pow = pow * lambda.clone();
        let d = (pow.clone() - one.clone()).cabs();
        if j < q && d <= tol {
            return Err(Error::Precondition(format!("λ is a {j}-th root of unity, not a primitive {q}-th")));
        }
        if j == q && d > tol {
            return Err(Error::Precondition(format!("λ^{q} ≠ 1 (off by {:e})", d.to_f64())));
        }
    }
    Ok(())
}

/// True when `b` vanishes for parity reasons alone: at `a = 0` the map is odd,
/// so every iterate is odd and the even coefficient `z^{q+1}` is zero for odd
/// `q`. Such stages carry no information about the scaling law.
pub fn parity_forced_zero<T: Real>(a: &Complex<T>, q: i128) -> bool {
    a.is_zero() && q % 2 == 1
}

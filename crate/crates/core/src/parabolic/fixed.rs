use std::f64::consts::{PI, TAU};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::cubic::CubicMap;
use crate::error::{Error, Result};
use crate::numerics::{ComplexExt, Real};
use crate::siegel::LinearizationSeries;

/// Sample counts are doubled at most up to this before giving up.
pub const MAX_CONTOUR_SAMPLES: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContourWinding {
    pub winding: i64,
    /// Largest sample count used; the count agreed at `m/4`, `m/2` and `m`.
    pub samples: usize,
}

/// Winding number of `func ∘ gamma` around 0 on the closed curve
/// `gamma: [0, 1) → ℂ`, by the argument principle.
///
/// Starting from `m0` samples, the count is accepted once every sampled
/// argument step is below `π/2` and the integer survives two successive
/// doublings. A sample with `|func| ≤ 2^{-P/2} · max|func|` means the contour
/// passes (numerically) through a zero and is an error.
pub fn contour_winding<T, G, F>(gamma: G, func: F, m0: usize) -> Result<ContourWinding>
where
    T: Real,
    G: Fn(f64) -> Complex<T>,
    F: Fn(&Complex<T>) -> Complex<T>,
{
    let mut m = m0.max(8);
    let mut history: Vec<i64> = Vec::new();
    loop {
        if m > MAX_CONTOUR_SAMPLES {
            return Err(Error::Degenerate(format!(
                "argument principle did not stabilize within {MAX_CONTOUR_SAMPLES} samples"
            )));
        }
        match winding_at(&gamma, &func, m)? {
            Some(w) => {
                history.push(w);
                let k = history.len();
                if k >= 3 && history[k - 1] == history[k - 2] && history[k - 2] == history[k - 3] {
                    return Ok(ContourWinding { winding: w, samples: m });
                }
            }
            None => history.clear(),
        }
        m *= 2;
    }
}

/// Winding at `m` samples, or `None` when some step is too coarse to trust.
fn winding_at<T, G, F>(gamma: &G, func: &F, m: usize) -> Result<Option<i64>>
where
    T: Real,
    G: Fn(f64) -> Complex<T>,
    F: Fn(&Complex<T>) -> Complex<T>,
{
    let values: Vec<Complex<T>> = (0..m).map(|j| func(&gamma(j as f64 / m as f64))).collect();
    if values.iter().any(|v| !v.is_finite_c()) {
        return Err(Error::Range("contour_winding"));
    }
    let logs: Vec<f64> = values.iter().map(|v| v.cabs().ln_abs_f64()).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let floor = top - (T::working_bits() as f64 / 2.0) * std::f64::consts::LN_2;
    if let Some(j) = logs.iter().position(|&l| l <= floor) {
        return Err(Error::Degenerate(format!(
            "contour passes through a zero near t = {:.6}; choose a different radius",
            j as f64 / m as f64
        )));
    }
    let args: Vec<f64> = values.iter().map(|v| v.carg().to_f64()).collect();
    let mut total = 0.0;
    for j in 0..m {
        let step = wrap(args[(j + 1) % m] - args[j]);
        if step.abs() >= PI / 2.0 {
            return Ok(None);
        }
        total += step;
    }
    Ok(Some((total / TAU).round() as i64))
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPointCount {
    /// Zeros of `f_n^{∘q}(z) − z` inside the contour, with multiplicity.
    pub winding: i64,
    /// `winding − (q + 1)`: fixed points other than the origin.
    pub n_extra: i64,
    pub samples: usize,
}

/// Counts fixed points of `f_n^{∘q}` inside `γ = ψ(|w| = r1 · r_hat)`.
///
/// The polynomial `f_n^{∘q}(z) − z` (degree `3^q`) is never expanded; it is
/// evaluated on the contour by iteration. When `b_n ≠ 0` the origin accounts
/// for `q + 1` of the zeros.
pub fn count_fixed_points<T: Real>(
    f_n: &CubicMap<T>,
    series: &LinearizationSeries<T>,
    q: usize,
    r1: f64,
    m: usize,
) -> Result<FixedPointCount> {
    if !(r1 > 0.0 && r1 < 1.0) {
        return Err(Error::Precondition(format!("r1 must lie in (0, 1), got {r1}")));
    }
    let radius = r1 * series.radius()?;
    let gamma = |t: f64| {
        let w = Complex::<T>::from_f64s(radius * (TAU * t).cos(), radius * (TAU * t).sin());
        series.psi_eval(&w)
    };
    let func = |z: &Complex<T>| {
        let mut x = z.clone();
        for _ in 0..q {
            x = f_n.eval(&x);
        }
        x - z.clone()
    };
    let c = contour_winding(gamma, func, m)?;
    Ok(FixedPointCount { winding: c.winding, n_extra: c.winding - (q as i64 + 1), samples: c.samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parabolic::rational_multiplier;
    use crate::rotation::{cf_value, CFExpansion};
    use crate::siegel::linearizer;
    use crate::{XComplex, XReal, C64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn circle(r: f64) -> impl Fn(f64) -> C64 {
        move |t| C64::from_polar(r, TAU * t)
    }

    #[test]
    fn cubic_minus_eps_z() {
        // z³ − εz has roots 0, ±√ε.
        let eps = 0.04;
        let f = |z: &C64| z * z * z - eps * z;
        assert_eq!(contour_winding(circle(0.1), f, 16).unwrap().winding, 1);
        assert_eq!(contour_winding(circle(0.5), f, 16).unwrap().winding, 3);
    }

    #[test]
    fn random_polynomials_count_their_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut cases = 0;
        while cases < 10 {
            let roots: Vec<C64> = (0..rng.gen_range(1..8))
                .map(|_| C64::from_polar(rng.gen_range(0.0..2.0), rng.gen_range(0.0..TAU)))
                .collect();
            let r = rng.gen_range(0.3..1.7);
            if roots.iter().any(|z| (z.norm() - r).abs() < 0.05) {
                continue;
            }
            let inside = roots.iter().filter(|z| z.norm() < r).count() as i64;
            let p = |z: &C64| roots.iter().fold(C64::new(1.0, 0.0), |acc, w| acc * (z - w));
            assert_eq!(contour_winding(circle(r), p, 8).unwrap().winding, inside);
            cases += 1;
        }
    }

    #[test]
    fn zero_on_contour_is_reported() {
        let f = |z: &C64| z - C64::new(0.5, 0.0);
        assert!(matches!(contour_winding(circle(0.5), f, 16), Err(Error::Degenerate(_))));
    }

    #[test]
    fn period_two_normal_form() {
        let lambda = XComplex::unit_turn(&cf_value::<XReal>(&CFExpansion::golden()));
        let a = XComplex::from_f64s(0.3, 0.1);
        let series = linearizer(&CubicMap::new(lambda, a.clone()), 256).unwrap();
        let f2 = CubicMap::new(rational_multiplier::<XReal>(1, 2).unwrap(), a);
        let c = count_fixed_points(&f2, &series, 2, 0.05, 32).unwrap();
        assert_eq!((c.winding, c.n_extra), (3, 0));
    }

    #[test]
    fn degenerate_q2_has_higher_multiplicity() {
        let lambda = XComplex::unit_turn(&cf_value::<XReal>(&CFExpansion::golden()));
        let a = XComplex::from_f64s(0.0, 1.0);
        let series = linearizer(&CubicMap::new(lambda, a.clone()), 256).unwrap();
        let f2 = CubicMap::new(rational_multiplier::<XReal>(1, 2).unwrap(), a);
        let c = count_fixed_points(&f2, &series, 2, 0.05, 32).unwrap();
        assert!(c.winding > 3, "{c:?}");
    }
}

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::LinearizationSeries;
use crate::cubic::CubicMap;
use crate::error::{Error, Result};
use crate::numerics::{ComplexExt, Real};

/// Default safety factor for Siegel-disk membership.
pub const DEFAULT_SAFETY: f64 = 0.9;
/// Default orbit budget for capture tests.
pub const DEFAULT_CAPTURE_BUDGET: usize = 200;

/// Samples on the circle `|w| = ρ r_hat` used to bound `|ψ|` there.
const IMAGE_SAMPLES: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub enum CaptureVerdict<T: Real> {
    /// `f^k(c)` has linearizing coordinate `w` with `|w| < ρ r_hat`.
    Landed { k: usize, w: Complex<T> },
    /// The orbit left the escape disk at step `k`.
    Escaped { k: usize },
    /// The orbit entered the coordinate patch only in the band
    /// `ρ r_hat ≤ |w| < r_hat`, too close to the boundary for a verdict.
    Unresolved { k: usize, w: Complex<T> },
    /// Budget exhausted without landing.
    NotCaptured,
}

impl<T: Real> CaptureVerdict<T> {
    pub fn landed_at(&self) -> Option<usize> {
        match self {
            CaptureVerdict::Landed { k, .. } => Some(*k),
            _ => None,
        }
    }

    pub fn w_value(&self) -> Option<&Complex<T>> {
        match self {
            CaptureVerdict::Landed { w, .. } => Some(w),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaptureKind {
    Landed,
    Escaped,
    Unresolved,
    NotCaptured,
}

impl<T: Real> CaptureVerdict<T> {
    pub fn kind(&self) -> CaptureKind {
        match self {
            CaptureVerdict::Landed { .. } => CaptureKind::Landed,
            CaptureVerdict::Escaped { .. } => CaptureKind::Escaped,
            CaptureVerdict::Unresolved { .. } => CaptureKind::Unresolved,
            CaptureVerdict::NotCaptured => CaptureKind::NotCaptured,
        }
    }
}

/// Finds the least `k ≤ budget` with `f^k(c)` inside `ψ(D(0, ρ r_hat))`.
///
/// Points whose modulus exceeds `max_{|w| = ρ r_hat} |ψ(w)|` (sampled, with a
/// 25% margin) cannot be inside and skip the inversion.
pub fn capture_test<T: Real>(
    f: &CubicMap<T>,
    series: &LinearizationSeries<T>,
    c: &Complex<T>,
    budget: usize,
    rho: f64,
) -> Result<CaptureVerdict<T>> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Precondition(format!("safety factor must lie in (0, 1), got {rho}")));
    }
    let r_hat = series.radius()?;
    let inner = T::from_f64(rho * r_hat);
    let outer = T::from_f64(r_hat);
    let reach = T::from_f64(1.25 * image_bound(series, rho * r_hat));
    let escape = T::from_f64(f.escape_radius());
    let mut z = c.clone();
    let mut near_boundary: Option<(usize, Complex<T>)> = None;
    for k in 0..=budget {
        if !z.is_finite_c() {
            return Err(Error::Range("capture_test"));
        }
        let m = z.cabs();
        if m > escape {
            return Ok(CaptureVerdict::Escaped { k });
        }
        if m <= reach {
            if let Ok(w) = series.phi_eval(&z) {
                let wm = w.cabs();
                if wm < inner {
                    return Ok(CaptureVerdict::Landed { k, w });
                }
                if wm < outer && near_boundary.is_none() {
                    near_boundary = Some((k, w));
                }
            }
        }
        if k < budget {
            z = f.eval(&z);
        }
    }
    Ok(match near_boundary {
        Some((k, w)) => CaptureVerdict::Unresolved { k, w },
        None => CaptureVerdict::NotCaptured,
    })
}

/// Sampled `max |ψ(w)|` over `|w| = radius`.
fn image_bound<T: Real>(series: &LinearizationSeries<T>, radius: f64) -> f64 {
    (0..IMAGE_SAMPLES)
        .map(|j| {
            let t = std::f64::consts::TAU * j as f64 / IMAGE_SAMPLES as f64;
            let w = Complex::<T>::from_f64s(radius * t.cos(), radius * t.sin());
            series.psi_eval(&w).cabs().to_f64()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::super::linearizer;
    use super::*;
    use crate::cubic::green;
    use crate::rotation::{cf_value, CFExpansion};
    use crate::C64;

    fn golden() -> C64 {
        C64::unit_turn(&cf_value::<f64>(&CFExpansion::golden()))
    }

    #[test]
    fn point_near_origin_lands_immediately() {
        let f = CubicMap::new(golden(), C64::new(1e-3, 0.0));
        let s = linearizer(&f, 256).unwrap();
        let v = capture_test(&f, &s, &C64::new(0.01, 0.005), 50, DEFAULT_SAFETY).unwrap();
        assert_eq!(v.landed_at(), Some(0));
    }

    #[test]
    fn escaping_critical_point() {
        // Coefficients grow like 30^k here, so keep the f64 series short.
        let f = CubicMap::new(golden(), C64::new(30.0, 5.0));
        let s = linearizer(&f, 64).unwrap();
        let (cp, cm) = f.critical_points();
        let big = if cp.norm() > cm.norm() { cp } else { cm };
        let v = capture_test(&f, &s, &big, 100, DEFAULT_SAFETY).unwrap();
        assert!(matches!(v, CaptureVerdict::Escaped { .. }));
        assert!(green(&f, &big, 1e-9, 10_000).unwrap().value > 0.0);
    }

    #[test]
    fn centre_lands_with_zero_coordinate() {
        // a = 2√λ: the critical point −√λ is a non-zero root of f, so f(c) = 0.
        let lambda = golden();
        let root = lambda.sqrt();
        let f = CubicMap::new(lambda, 2.0 * root);
        let s = linearizer(&f, 256).unwrap();
        let c = -root;
        assert!(f.derivative(&c).norm() < 1e-12);
        let v = capture_test(&f, &s, &c, 50, DEFAULT_SAFETY).unwrap();
        assert_eq!(v.landed_at(), Some(1));
        assert!(v.w_value().unwrap().norm() < 1e-12);
    }

    #[test]
    fn safety_factor_validated() {
        let f = CubicMap::new(golden(), C64::new(0.0, 0.0));
        let s = linearizer(&f, 128).unwrap();
        assert!(capture_test(&f, &s, &C64::new(0.1, 0.0), 5, 1.0).is_err());
    }
}

use num_complex::Complex;
use num_traits::Zero;

use super::LinearizationSeries;
use crate::error::{Error, Result};
use crate::numerics::{ComplexExt, Real};

const MAX_NEWTON: usize = 80;
const MAX_HALVINGS: usize = 40;
const CONTINUATION_STEPS: usize = 16;

impl<T: Real> LinearizationSeries<T> {
    /// The linearizing coordinate `φ(z)`, i.e. the `w` with `ψ(w) = z`,
    /// found by damped Newton iteration seeded at `w = z`, with a radial
    /// continuation fallback. Fails with [`Error::OutsideDomain`] when no
    /// solution with `|w| < r_hat` and `|ψ(w) − z| ≤ 2^{-P/2}|z|` is found.
    pub fn phi_eval(&self, z: &Complex<T>) -> Result<Complex<T>> {
        self.phi_eval_seeded(z, z)
    }

    /// As [`phi_eval`](Self::phi_eval) with an explicit Newton seed.
    pub fn phi_eval_seeded(&self, z: &Complex<T>, seed: &Complex<T>) -> Result<Complex<T>> {
        if z.is_zero() {
            return Ok(Complex::zero());
        }
        let r_hat = self.radius()?;
        if let Some(w) = self.newton(z, seed.clone(), r_hat) {
            return Ok(w);
        }
        // Walk z along the ray from 0, re-seeding from the previous solution.
        let mut w = Complex::zero();
        for j in 1..=CONTINUATION_STEPS {
            let t = T::from_f64(j as f64 / CONTINUATION_STEPS as f64);
            let zj = z.clone() * Complex::from_real(t);
            w = self
                .newton(&zj, w, r_hat)
                .ok_or_else(|| Error::OutsideDomain(format!("φ inversion failed at |z| = {:e}", z.cabs().to_f64())))?;
        }
        Ok(w)
    }

    fn newton(&self, z: &Complex<T>, mut w: Complex<T>, r_hat: f64) -> Option<Complex<T>> {
        let zabs = z.cabs();
        let accept = zabs.clone() * T::from_f64((-(T::working_bits() as f64) / 2.0).exp2());
        let converged = zabs * T::from_f64((-(T::working_bits() as f64) + 8.0).exp2());
        let limit = T::from_f64(r_hat);
        let (mut value, mut slope) = self.psi.eval_with_derivative(&w);
        let mut res = (value.clone() - z.clone()).cabs();
        for _ in 0..MAX_NEWTON {
            if res <= converged {
                break;
            }
            if slope.is_zero() {
                return None;
            }
            let step = (value.clone() - z.clone()) / slope.clone();
            let mut scale = T::from_f64(1.0);
            let mut improved = false;
            for _ in 0..MAX_HALVINGS {
                let cand = w.clone() - step.clone() * Complex::from_real(scale.clone());
                if cand.cabs() < limit {
                    let (v, s) = self.psi.eval_with_derivative(&cand);
                    let r = (v.clone() - z.clone()).cabs();
                    if r < res {
                        (w, value, slope, res) = (cand, v, s, r);
                        improved = true;
                        break;
                    }
                }
                scale = scale / T::from_f64(2.0);
            }
            if !improved {
                break;
            }
        }
        (res <= accept && w.cabs() < limit).then_some(w)
    }
}

#[cfg(test)]
mod tests {
    use super::super::linearizer;
    use super::*;
    use crate::cubic::CubicMap;
    use crate::rotation::{cf_value, CFExpansion};
    use crate::{XComplex, XReal};

    fn series() -> LinearizationSeries<XReal> {
        let lambda = XComplex::unit_turn(&cf_value::<XReal>(&CFExpansion::golden()));
        linearizer(&CubicMap::new(lambda, XComplex::from_f64s(0.25, 0.15)), 256).unwrap()
    }

    #[test]
    fn origin_maps_to_origin() {
        assert!(series().phi_eval(&XComplex::zero()).unwrap().is_zero());
    }

    #[test]
    fn inverse_pair_roundtrip() {
        let s = series();
        let r = s.r_hat.unwrap();
        for k in 0..12 {
            let t = k as f64 * 0.53;
            let m = 0.5 * r * (k + 1) as f64 / 12.0;
            let w = XComplex::from_f64s(m * t.cos(), m * t.sin());
            let back = s.phi_eval(&s.psi_eval(&w)).unwrap();
            assert!(((back - w.clone()).cabs() / w.cabs()).to_f64() < 1e-10);
        }
    }

    #[test]
    fn conjugacy_equation() {
        let s = series();
        let f = s.map();
        let r = s.r_hat.unwrap();
        for k in 0..8 {
            let t = k as f64 * 0.81;
            let z = s.psi_eval(&XComplex::from_f64s(0.4 * r * t.cos(), 0.4 * r * t.sin()));
            let lhs = s.phi_eval(&f.eval(&z)).unwrap();
            let rhs = s.lambda.clone() * s.phi_eval(&z).unwrap();
            assert!(((lhs - rhs.clone()).cabs() / rhs.cabs()).to_f64() < 1e-8);
        }
    }

    #[test]
    fn far_points_are_outside() {
        let s = series();
        let z = XComplex::from_f64s(50.0, 0.0);
        assert!(matches!(s.phi_eval(&z), Err(Error::OutsideDomain(_))));
    }
}

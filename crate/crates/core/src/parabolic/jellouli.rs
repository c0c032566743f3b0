use std::f64::consts::TAU;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stage::rational_multiplier;
use crate::cubic::CubicMap;
use crate::error::{Error, Result};
use crate::numerics::{ComplexExt, Real};
use crate::rotation::{cf_value, convergents, CFExpansion};
use crate::siegel::{linearizer, LinearizationSeries};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JellouliStat {
    pub n: usize,
    pub q: i128,
    /// `max q² |φ(f^{∘k}(ψ(z))) − λ_n^k z| / (k|z|)` over samples and `k ≤ q`.
    pub c_hat: f64,
    pub samples_used: usize,
    /// Samples dropped because some orbit point left the coordinate patch.
    pub skipped: Vec<String>,
}

/// Where the Jellouli samples go: `m` points on `|z| = r0 · r_hat`, rotated
/// by an offset drawn from `seed`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JellouliSampling {
    pub r0: f64,
    pub m: usize,
    pub seed: u64,
}

impl Default for JellouliSampling {
    fn default() -> Self {
        JellouliSampling { r0: 0.5, m: 16, seed: 0 }
    }
}

/// The empirical constant of the drift bound `|φ ∘ f^{∘k} ∘ ψ(z) − λ_n^k z|
/// ≤ C k|z|/q²` for `map`, normally the cubic at `λ_n`.
pub fn jellouli_with<T: Real>(
    series: &LinearizationSeries<T>,
    map: &CubicMap<T>,
    lambda_n: &Complex<T>,
    (n, q): (usize, i128),
    sampling: &JellouliSampling,
) -> Result<JellouliStat> {
    let JellouliSampling { r0, m, seed } = *sampling;
    if !(r0 > 0.0 && r0 < 1.0) || m == 0 {
        return Err(Error::Precondition(format!("need 0 < r0 < 1 and m > 0, got r0 = {r0}, m = {m}")));
    }
    let steps = usize::try_from(q).map_err(|_| Error::Precondition(format!("bad denominator {q}")))?;
    let radius = r0 * series.radius()?;
    let offset = ChaCha8Rng::seed_from_u64(seed).gen::<f64>() * TAU / m as f64;
    let q2 = (q as f64) * (q as f64);
    let mut c_hat = 0.0_f64;
    let mut used = 0;
    let mut skipped = Vec::new();
    for j in 0..m {
        let t = offset + TAU * j as f64 / m as f64;
        let w0 = Complex::<T>::from_f64s(radius * t.cos(), radius * t.sin());
        let mut z = series.psi_eval(&w0);
        let mut rot = w0.clone();
        let mut worst = 0.0_f64;
        let mut failed = None;
        for k in 1..=steps {
            z = map.eval(&z);
            rot = rot * lambda_n.clone();
            match series.phi_eval_seeded(&z, &rot) {
                Ok(w) => {
                    let dev = (w - rot.clone()).cabs().to_f64();
                    worst = worst.max(q2 * dev / (k as f64 * radius));
                }
                Err(e) => {
                    failed = Some(format!("sample {j} at step {k}: {e}"));
                    break;
                }
            }
        }
        match failed {
            Some(why) => skipped.push(why),
            None => {
                used += 1;
                c_hat = c_hat.max(worst);
            }
        }
    }
    if used == 0 {
        return Err(Error::OutsideDomain(format!("every Jellouli sample left the coordinate patch: {skipped:?}")));
    }
    Ok(JellouliStat { n, q, c_hat, samples_used: used, skipped })
}

/// [`jellouli_with`] for the cubic at the `n`-th convergent of `cf`.
pub fn jellouli_stat(
    a: &crate::XComplex,
    cf: &CFExpansion,
    n: usize,
    order: usize,
    sampling: &JellouliSampling,
) -> Result<JellouliStat> {
    let c = convergents(cf, n)?.pop().ok_or_else(|| Error::Precondition(format!("no convergent with index {n}")))?;
    let lambda = Complex::unit_turn(&cf_value::<crate::XReal>(cf));
    let series = linearizer(&CubicMap::new(lambda, a.clone()), order)?;
    let lambda_n = rational_multiplier::<crate::XReal>(c.p, c.q)?;
    let map = CubicMap::new(lambda_n.clone(), a.clone());
    jellouli_with(&series, &map, &lambda_n, (n, c.q), sampling)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{XComplex, XReal};
    use num_traits::Zero;

    fn sampling(r0: f64, seed: u64) -> JellouliSampling {
        JellouliSampling { r0, m: 8, seed }
    }

    #[test]
    fn siegel_map_obeys_rotation_bound() {
        let cf = CFExpansion::golden();
        let lambda = XComplex::unit_turn(&cf_value::<XReal>(&cf));
        let f = CubicMap::new(lambda, XComplex::from_f64s(0.2, 0.1));
        let series = linearizer(&f, 256).unwrap();
        for c in convergents(&cf, 7).unwrap().into_iter().skip(2) {
            let lambda_n = rational_multiplier::<XReal>(c.p, c.q).unwrap();
            let s = jellouli_with(&series, &f, &lambda_n, (c.n, c.q), &sampling(0.5, 1)).unwrap();
            assert!(s.c_hat <= TAU, "q={}: {}", c.q, s.c_hat);
            assert_eq!(s.samples_used, 8);
        }
    }

    #[test]
    fn bounded_in_n_at_origin() {
        let cf = CFExpansion::golden();
        let vals: Vec<f64> =
            (4..=8).map(|n| jellouli_stat(&XComplex::zero(), &cf, n, 256, &sampling(0.5, 3)).unwrap().c_hat).collect();
        let (lo, hi) = vals.iter().fold((f64::MAX, 0.0_f64), |(l, h), &v| (l.min(v), h.max(v)));
        assert!(lo > 0.0 && hi / lo <= 10.0, "{vals:?}");
    }

    #[test]
    fn stable_under_halving_r0() {
        let cf = CFExpansion::golden();
        let a = XComplex::zero();
        let big = jellouli_stat(&a, &cf, 6, 256, &sampling(0.4, 5)).unwrap().c_hat;
        let small = jellouli_stat(&a, &cf, 6, 256, &sampling(0.2, 5)).unwrap().c_hat;
        let ratio = big / small;
        assert!((0.5..=2.0).contains(&ratio), "{big} vs {small}");
    }
}

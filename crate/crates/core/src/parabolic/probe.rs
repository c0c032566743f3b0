use std::f64::consts::PI;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::stage::rational_multiplier;
use crate::cubic::CubicMap;
use crate::error::{Error, Result};
use crate::numerics::{convert, ComplexExt, Real};
use crate::rotation::{cf_value, convergents, CFExpansion};
use crate::siegel::{capture_test, linearizer, LinearizationSeries};
use crate::C64;

/// Points closer than this (radians) to a band edge get no verdict.
pub const BAND_EDGE_MARGIN: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PetalVerdict {
    /// `arg δ ∈ (3π/4, 5π/4)`: the return map pushes the point back toward
    /// the fixed point.
    AttractingBand,
    RepellingSide,
    Unresolved,
}

/// Displacement of one return `f_n^{∘q}` seen in the Siegel coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct PetalProbe<T: Real> {
    pub n: usize,
    pub z_star: Complex<T>,
    /// `log φ(z_star)`, principal branch.
    pub w: Option<Complex<T>>,
    /// `Log(φ(f_n^{∘q}(z_star)) / φ(z_star))`, principal branch.
    pub delta: Option<Complex<T>>,
    /// `0` inside the attracting band around `arg δ = π`, `None` otherwise.
    pub band_index: Option<i64>,
    pub verdict: PetalVerdict,
    /// Why no verdict could be given, when that is the case.
    pub cause: Option<String>,
}

impl<T: Real> PetalProbe<T> {
    /// `arg δ` in `(−π, π]`.
    pub fn arg_delta(&self) -> Option<f64> {
        self.delta.as_ref().map(|d| d.carg().to_f64())
    }
}

/// Classifies `arg δ` (any branch) against the bands `(3π/4, 5π/4) + 2πk`.
pub fn band_verdict(arg: f64) -> (PetalVerdict, Option<i64>) {
    let k = ((arg - 0.75 * PI) / (2.0 * PI)).floor();
    let local = arg - 2.0 * PI * k;
    let edges = [0.75 * PI, 1.25 * PI, 2.75 * PI];
    if edges.iter().any(|e| (local - e).abs() < BAND_EDGE_MARGIN) {
        return (PetalVerdict::Unresolved, None);
    }
    if local < 1.25 * PI {
        (PetalVerdict::AttractingBand, Some(k as i64))
    } else {
        (PetalVerdict::RepellingSide, None)
    }
}

/// Probes `z_star` under one return `f_n^{∘q}` in the linearizing coordinate
/// of the Siegel map that `series` was built for.
///
/// `φ` belongs to the map at the irrational multiplier; using it for the
/// nearby rational map is the point of the construction. Domain failures and
/// zero displacement give an unresolved verdict with the cause recorded.
pub fn petal_probe<T: Real>(
    f_n: &CubicMap<T>,
    series: &LinearizationSeries<T>,
    z_star: &Complex<T>,
    n: usize,
    q: usize,
) -> PetalProbe<T> {
    let unresolved = |w: Option<Complex<T>>, delta: Option<Complex<T>>, cause: String| PetalProbe {
        n,
        z_star: z_star.clone(),
        w,
        delta,
        band_index: None,
        verdict: PetalVerdict::Unresolved,
        cause: Some(cause),
    };
    let phi0 = match series.phi_eval(z_star) {
        Ok(v) => v,
        Err(e) => return unresolved(None, None, format!("z_star: {e}")),
    };
    if phi0.is_zero() {
        return unresolved(None, None, "z_star is the fixed point".into());
    }
    let w = phi0.cln();
    let mut z = z_star.clone();
    for _ in 0..q {
        z = f_n.eval(&z);
    }
    if !z.is_finite_c() {
        return unresolved(Some(w), None, "return orbit overflowed".into());
    }
    // The return is close to the identity in the φ-coordinate, so φ(z_star)
    // is the natural Newton seed.
    let phi1 = match series.phi_eval_seeded(&z, &phi0).or_else(|_| series.phi_eval(&z)) {
        Ok(v) => v,
        Err(e) => return unresolved(Some(w), None, format!("return point: {e}")),
    };
    let ratio = phi1 / phi0;
    let delta = ratio.cln();
    if delta.is_zero() {
        return unresolved(Some(w), Some(delta), "zero displacement".into());
    }
    let (verdict, band_index) = band_verdict(delta.carg().to_f64().rem_euclid(2.0 * PI));
    PetalProbe {
        n,
        z_star: z_star.clone(),
        w: Some(w),
        delta: Some(delta),
        band_index,
        verdict,
        cause: (verdict == PetalVerdict::Unresolved).then(|| "within margin of a band edge".to_string()),
    }
}

/// Step control for [`winding_experiment`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindingControl {
    /// Capture depth every path point must show at the Siegel multiplier.
    pub depth: usize,
    pub series_order: usize,
    pub capture_budget: usize,
    pub safety: f64,
    /// Smallest parameter step before branch tracking gives up.
    pub min_step: f64,
}

impl Default for WindingControl {
    fn default() -> Self {
        WindingControl { depth: 1, series_order: 256, capture_budget: 200, safety: 0.9, min_step: 1e-12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindingSample {
    pub a: C64,
    /// Branch-continuous `arg δ`.
    pub arg_delta: f64,
    /// `log10 |δ|`.
    pub log10_abs_delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindingReport {
    pub n: usize,
    pub q: i128,
    /// `Σ |Δ arg δ|` along the path.
    pub total_arg_variation: f64,
    /// `arg δ(end) − arg δ(start)`.
    pub net_arg_change: f64,
    /// Crossings of band centres `arg δ = π + 2πk`.
    pub band_crossings: usize,
    pub samples: Vec<WindingSample>,
}

/// Tracks `arg δ_n(a)` continuously along a polyline in parameter space, with
/// `z_star = f_{λ_n,a}^{∘k}(c_{λ_n,a})` and `δ` from [`petal_probe`].
///
/// The critical point is the one captured at depth `k` by the Siegel map at
/// the start of the path, followed by continuity afterwards. Segments are
/// bisected until successive `arg δ` differ by less than `π/2`.
pub fn winding_experiment(path: &[C64], cf: &CFExpansion, n: usize, ctl: &WindingControl) -> Result<WindingReport> {
    if path.is_empty() {
        return Err(Error::Precondition("winding path is empty".into()));
    }
    let conv = convergents(cf, n)?.pop().ok_or_else(|| Error::Precondition(format!("no convergent with index {n}")))?;
    let q = usize::try_from(conv.q).map_err(|_| Error::Range("winding_experiment"))?;
    let lambda = Complex::unit_turn(&cf_value::<crate::XReal>(cf));
    let lambda_n = rational_multiplier::<crate::XReal>(conv.p, conv.q)?;
    let ctx = Ctx { lambda, lambda_n, n, q, ctl };

    let mut crit = ctx.captured_critical_point(path[0])?;
    let first = ctx.sample(path[0], &mut crit)?;
    let mut samples = vec![WindingSample { a: path[0], arg_delta: first.0, log10_abs_delta: first.1 }];
    for pair in path.windows(2) {
        ctx.track(pair[0], pair[1], &mut crit, &mut samples, 0)?;
    }
    let total_arg_variation = samples.windows(2).map(|s| (s[1].arg_delta - s[0].arg_delta).abs()).sum();
    let net_arg_change = samples.last().map_or(0.0, |s| s.arg_delta) - samples[0].arg_delta;
    let level = |x: f64| ((x - PI) / (2.0 * PI)).floor() as i64;
    let band_crossings =
        samples.windows(2).map(|s| (level(s[1].arg_delta) - level(s[0].arg_delta)).unsigned_abs() as usize).sum();
    Ok(WindingReport { n, q: conv.q, total_arg_variation, net_arg_change, band_crossings, samples })
}

struct Ctx<'a> {
    lambda: Complex<crate::XReal>,
    lambda_n: Complex<crate::XReal>,
    n: usize,
    q: usize,
    ctl: &'a WindingControl,
}

type XC = Complex<crate::XReal>;

impl Ctx<'_> {
    fn captured_critical_point(&self, a: C64) -> Result<XC> {
        let f = CubicMap::new(self.lambda.clone(), convert(&a));
        let series = linearizer(&f, self.ctl.series_order)?;
        let (c1, c2) = f.critical_points();
        for c in [c1, c2] {
            let v = capture_test(&f, &series, &c, self.ctl.capture_budget, self.ctl.safety)?;
            if v.landed_at() == Some(self.ctl.depth) {
                return Ok(c);
            }
        }
        Err(Error::Precondition(format!("no critical point is captured at depth {} for a = {a}", self.ctl.depth)))
    }

    /// `(arg δ, log10|δ|)` at `a`; updates `crit` to this parameter's critical
    /// point nearest to the previous one.
    fn sample(&self, a: C64, crit: &mut XC) -> Result<(f64, f64)> {
        let ax: XC = convert(&a);
        let f = CubicMap::new(self.lambda.clone(), ax.clone());
        let series = linearizer(&f, self.ctl.series_order)?;
        let (c1, c2) = f.critical_points();
        let c = if (c1.clone() - crit.clone()).cabs() <= (c2.clone() - crit.clone()).cabs() { c1 } else { c2 };
        let v = capture_test(&f, &series, &c, self.ctl.capture_budget, self.ctl.safety)?;
        if v.landed_at() != Some(self.ctl.depth) {
            return Err(Error::Precondition(format!(
                "capture depth changes along the path: {:?} instead of {} at a = {a}",
                v.landed_at(),
                self.ctl.depth
            )));
        }
        *crit = c.clone();
        let f_n = CubicMap::new(self.lambda_n.clone(), ax);
        let (d1, d2) = f_n.critical_points();
        let mut z = if (d1.clone() - c.clone()).cabs() <= (d2.clone() - c).cabs() { d1 } else { d2 };
        for _ in 0..self.ctl.depth {
            z = f_n.eval(&z);
        }
        let probe = petal_probe(&f_n, &series, &z, self.n, self.q);
        match probe.delta {
            Some(d) if !d.is_zero() => Ok((d.carg().to_f64(), d.cabs().ln_abs_f64() / std::f64::consts::LN_10)),
            _ => {
                Err(Error::OutsideDomain(format!("petal probe failed at a = {a}: {}", probe.cause.unwrap_or_default())))
            }
        }
    }

    fn track(&self, from: C64, to: C64, crit: &mut XC, out: &mut Vec<WindingSample>, depth: u32) -> Result<()> {
        let prev = out.last().expect("seeded with the first sample").arg_delta;
        let mut c = crit.clone();
        let (arg, mag) = self.sample(to, &mut c)?;
        let step = wrap(arg - prev);
        if step.abs() < PI / 2.0 {
            *crit = c;
            out.push(WindingSample { a: to, arg_delta: prev + step, log10_abs_delta: mag });
            return Ok(());
        }
        if (to - from).norm() < self.ctl.min_step || depth > 60 {
            return Err(Error::Degenerate(format!(
                "branch tracking step underflow near a = {to}; path too coarse or b_n nearly vanishes"
            )));
        }
        let mid = (from + to) / 2.0;
        self.track(from, mid, crit, out, depth + 1)?;
        self.track(mid, to, crit, out, depth + 1)
    }
}

/// Reduces an angle difference to `(−π, π]`.
fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

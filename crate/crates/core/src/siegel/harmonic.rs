use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Sub-intervals per path segment for the coarse trapezoid pass.
const BASE_SUBDIVISIONS: usize = 8;

/// Increments of `Im u` along a polyline, where `u` is holomorphic with a
/// prescribed real part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicIncrements {
    /// One increment per path segment (refined pass).
    pub increments: Vec<f64>,
    /// Largest per-segment disagreement between the coarse pass (step `h`,
    /// `n` trapezoid panels) and the refined pass (`h/2`, `2n` panels).
    pub error: f64,
}

impl HarmonicIncrements {
    pub fn total(&self) -> f64 {
        self.increments.iter().sum()
    }
}

/// Recovers `Im u` increments along `path` from `Re u` alone.
///
/// `u' = ∂_x Re u − i ∂_y Re u` is evaluated with central differences of
/// step `h` and integrated against `da` by the trapezoid rule. In practice
/// `re_u` is `a ↦ log r_θ(a)`.
pub fn u_along_path<F>(path: &[C64], re_u: F, h: f64) -> Result<HarmonicIncrements>
where
    F: Fn(C64) -> Result<f64>,
{
    if path.len() < 2 {
        return Err(Error::Precondition("path needs at least two vertices".into()));
    }
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Precondition(format!("finite-difference step must be positive, got {h}")));
    }
    let mut increments = Vec::with_capacity(path.len() - 1);
    let mut error = 0.0f64;
    for seg in path.windows(2) {
        let coarse = segment_increment(&re_u, seg[0], seg[1], h, BASE_SUBDIVISIONS)?;
        let fine = segment_increment(&re_u, seg[0], seg[1], h / 2.0, 2 * BASE_SUBDIVISIONS)?;
        error = error.max((coarse - fine).abs());
        increments.push(fine);
    }
    Ok(HarmonicIncrements { increments, error })
}

fn derivative<F>(re_u: &F, a: C64, h: f64) -> Result<C64>
where
    F: Fn(C64) -> Result<f64>,
{
    let at = |p: C64| re_u(p).map_err(|e| Error::OutsideDomain(format!("Re u unavailable at a = {p}: {e}")));
    let dx = (at(a + C64::new(h, 0.0))? - at(a - C64::new(h, 0.0))?) / (2.0 * h);
    let dy = (at(a + C64::new(0.0, h))? - at(a - C64::new(0.0, h))?) / (2.0 * h);
    Ok(C64::new(dx, -dy))
}

fn segment_increment<F>(re_u: &F, from: C64, to: C64, h: f64, panels: usize) -> Result<f64>
where
    F: Fn(C64) -> Result<f64>,
{
    let da = (to - from) / panels as f64;
    let mut sum = C64::new(0.0, 0.0);
    for j in 0..=panels {
        let weight = if j == 0 || j == panels { 0.5 } else { 1.0 };
        sum += weight * derivative(re_u, from + da * j as f64, h)?;
    }
    Ok((sum * da).im)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_has_no_increments() {
        let path = [C64::new(0.0, 0.0), C64::new(1.0, 0.5), C64::new(-0.3, 2.0)];
        let out = u_along_path(&path, |_| Ok(0.7), 1e-3).unwrap();
        assert!(out.increments.iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn linear_holomorphic_oracle() {
        let alpha = C64::new(0.8, -1.3);
        let path = [C64::new(0.1, 0.1), C64::new(0.6, -0.2), C64::new(0.9, 0.7)];
        let out = u_along_path(&path, |a| Ok((alpha * a).re), 1e-3).unwrap();
        for (seg, inc) in path.windows(2).zip(&out.increments) {
            let want = (alpha * (seg[1] - seg[0])).im;
            assert!((inc - want).abs() <= 1e-3 * want.abs().max(1e-12), "{inc} vs {want}");
        }
    }

    #[test]
    fn closed_loop_is_exact() {
        // Re u = log|a − 3| is harmonic away from 3; a loop around 0 has no winding about 3.
        let path: Vec<C64> = (0..=24).map(|j| C64::from_polar(0.5, std::f64::consts::TAU * j as f64 / 24.0)).collect();
        let out = u_along_path(&path, |a| Ok((a - C64::new(3.0, 0.0)).norm().ln()), 1e-3).unwrap();
        assert!(out.total().abs() <= 2.0 * out.error + 1e-9, "{} vs {}", out.total(), out.error);
        // A loop around the singularity picks up the 2π period of arg(a − 3).
        let around: Vec<C64> = (0..=48)
            .map(|j| C64::new(3.0, 0.0) + C64::from_polar(0.5, std::f64::consts::TAU * j as f64 / 48.0))
            .collect();
        let out = u_along_path(&around, |a| Ok((a - C64::new(3.0, 0.0)).norm().ln()), 1e-3).unwrap();
        assert!((out.total() - std::f64::consts::TAU).abs() < 0.05);
    }

    #[test]
    fn failure_reports_location() {
        let path = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let err = u_along_path(&path, |a| if a.re > 0.5 { Err(Error::Degenerate("x".into())) } else { Ok(0.0) }, 1e-3)
            .unwrap_err();
        assert!(matches!(err, Error::OutsideDomain(msg) if msg.contains("a =")));
    }
}

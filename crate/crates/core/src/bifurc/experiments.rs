use std::ops::RangeInclusive;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::cubic::CubicMap;
use crate::error::{Error, Result};
use crate::numerics::{convert, ComplexExt, Real};
use crate::parabolic::{
    nondegenerate_at, parity_forced_zero, rational_multiplier, stage_for, DEFAULT_DEGENERACY_THRESHOLD,
};
use crate::rotation::{cf_value, convergents, noble_truncate, CFExpansion};
use crate::siegel::{capture_test, linearizer, CaptureVerdict};
use crate::C64;

/// Largest allowed `e_n` at the final stage of a scaling table.
pub const SCALING_TOLERANCE: f64 = 0.05;
/// Allowed relative radius mismatch at the last noble truncation.
pub const NOBLE_RADIUS_TOLERANCE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Computed,
    /// `b_n ≡ 0` by the odd symmetry at `a = 0`; not computed.
    ParitySkipped,
    /// The degeneracy gate flagged `a`; the experiment stops here.
    Refused,
    /// Precision ran out; the table ends here.
    Truncated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BnRow {
    pub n: usize,
    pub q: i128,
    pub status: RowStatus,
    pub log_abs_b: Option<f64>,
    pub arg_b_over_pi: Option<f64>,
    /// `(1/q) log|b_n|`.
    pub root_growth: Option<f64>,
    /// `|(1/q) log|b_n| + log r_hat|`.
    pub e_n: Option<f64>,
    pub residual: Option<f64>,
    pub bits: Option<u32>,
    pub note: Option<String>,
}

impl BnRow {
    fn bare(n: usize, q: i128, status: RowStatus, note: Option<String>) -> Self {
        BnRow {
            n,
            q,
            status,
            log_abs_b: None,
            arg_b_over_pi: None,
            root_growth: None,
            e_n: None,
            residual: None,
            bits: None,
            note,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BnScalingTable {
    pub a: C64,
    pub cf: CFExpansion,
    pub r_hat: f64,
    pub r_hat_err: f64,
    pub radius_order: usize,
    /// `−log r_hat`, the predicted limit of `(1/q) log|b_n|`.
    pub neg_log_r_hat: f64,
    pub rows: Vec<BnRow>,
}

impl BnScalingTable {
    pub fn refused(&self) -> Option<&BnRow> {
        self.rows.iter().find(|r| r.status == RowStatus::Refused)
    }

    pub fn truncated(&self) -> Option<&BnRow> {
        self.rows.iter().find(|r| r.status == RowStatus::Truncated)
    }

    /// Computed rows with `q ≥ 2`; the `q = 1` rows are pre-asymptotic.
    pub fn tail(&self) -> Vec<&BnRow> {
        self.rows.iter().filter(|r| r.status == RowStatus::Computed && r.q >= 2).collect()
    }

    /// The scaling check: `e_n ≤ 0.05` at the last computed stage, whose
    /// denominator must be at least `min_final_q`, and `e_n` strictly
    /// decreasing over the last three computed stages.
    pub fn check(&self, min_final_q: i128) -> ScalingCheck {
        let tail = self.tail();
        let es: Vec<f64> = tail.iter().filter_map(|r| r.e_n).collect();
        let mut problems = Vec::new();
        if let Some(r) = self.refused() {
            problems.push(format!("refused at q = {}", r.q));
        }
        let last = tail.last().map(|r| (r.q, r.e_n.unwrap_or(f64::INFINITY)));
        match last {
            None => problems.push("no computed stage with q >= 2".into()),
            Some((q, e)) => {
                if q < min_final_q {
                    problems.push(format!("largest computed q = {q} is below {min_final_q}"));
                }
                if e.is_nan() || e > SCALING_TOLERANCE {
                    problems.push(format!("final e_n = {e:.4} exceeds {SCALING_TOLERANCE}"));
                }
            }
        }
        let decreasing = es.len() >= 3 && es[es.len() - 3..].windows(2).all(|w| w[1] < w[0]);
        if !decreasing {
            problems.push(format!(
                "e_n not decreasing over the last three stages: {:?}",
                &es[es.len().saturating_sub(3)..]
            ));
        }
        ScalingCheck {
            passed: problems.is_empty(),
            final_q: last.map(|l| l.0),
            final_e: last.map(|l| l.1),
            decreasing,
            problems,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingCheck {
    pub passed: bool,
    pub final_q: Option<i128>,
    pub final_e: Option<f64>,
    pub decreasing: bool,
    pub problems: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BnScalingOptions {
    /// Series order for `r_hat`.
    pub radius_order: usize,
    /// Precision ceiling for a single stage.
    pub max_bits: u32,
    pub degeneracy_threshold: f64,
}

impl Default for BnScalingOptions {
    fn default() -> Self {
        BnScalingOptions {
            radius_order: 2048,
            max_bits: crate::parabolic::DEFAULT_MAX_STAGE_BITS,
            degeneracy_threshold: DEFAULT_DEGENERACY_THRESHOLD,
        }
    }
}

/// Rows `(n, q_n, (1/q_n) log|b_n|, −log r_hat, e_n)` along the convergents
/// of `cf` at parameter `a`.
///
/// Each stage is gated: parity zeros at `a = 0` are skipped without
/// computation, and any other stage whose local zero-proximity test flags `a`
/// ends the table with a refused row. Precision exhaustion ends it with a
/// truncated row. Neither is an `Err`; callers inspect the rows.
pub fn bn_scaling_experiment<T: Real>(
    a: C64,
    cf: &CFExpansion,
    n_range: RangeInclusive<usize>,
    opts: &BnScalingOptions,
) -> Result<BnScalingTable> {
    let a_t = convert::<f64, T>(&a);
    let lambda = Complex::<T>::unit_turn(&cf_value::<T>(cf));
    let series = linearizer(&CubicMap::new(lambda, a_t.clone()), opts.radius_order)?;
    let (r_hat, r_hat_err) = match (series.r_hat, series.r_hat_err) {
        (Some(r), Some(e)) => (r, e),
        _ => return Err(Error::Degenerate(format!("no conformal radius at order {}", opts.radius_order))),
    };
    let neg_log_r_hat = -r_hat.ln();
    let mut rows = Vec::new();
    for c in convergents(cf, *n_range.end())?.into_iter().filter(|c| n_range.contains(&c.n)) {
        if parity_forced_zero(&a_t, c.q) {
            rows.push(BnRow::bare(c.n, c.q, RowStatus::ParitySkipped, Some("odd map, odd q: b_n = 0".into())));
            continue;
        }
        let lambda_n = rational_multiplier::<T>(c.p, c.q)?;
        if !nondegenerate_at(&lambda_n, c.q, a, opts.degeneracy_threshold)? {
            rows.push(BnRow::bare(
                c.n,
                c.q,
                RowStatus::Refused,
                Some(format!("a is at a zero of b_n for q = {}; the scaling law does not apply", c.q)),
            ));
            break;
        }
        let stage = match stage_for(&c, &a_t, opts.max_bits) {
            Ok(s) => s,
            Err(e @ Error::Precision(_)) => {
                rows.push(BnRow::bare(c.n, c.q, RowStatus::Truncated, Some(e.to_string())));
                break;
            }
            Err(e) => return Err(e),
        };
        let s = stage.summary();
        let growth = s.log_abs_b / c.q as f64;
        rows.push(BnRow {
            n: c.n,
            q: c.q,
            status: RowStatus::Computed,
            log_abs_b: Some(s.log_abs_b),
            arg_b_over_pi: Some(s.arg_b_over_pi),
            root_growth: Some(growth),
            e_n: Some((growth - neg_log_r_hat).abs()),
            residual: Some(s.residual),
            bits: Some(s.bits),
            note: None,
        });
    }
    Ok(BnScalingTable { a, cf: cf.clone(), r_hat, r_hat_err, radius_order: opts.radius_order, neg_log_r_hat, rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NobleRow {
    pub n: usize,
    pub cf: String,
    pub theta: f64,
    pub r_hat: Option<f64>,
    pub depth: Option<usize>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NobleTable {
    pub a: C64,
    pub cf: CFExpansion,
    pub reference_r_hat: f64,
    pub reference_depth: usize,
    pub rows: Vec<NobleRow>,
}

impl NobleTable {
    /// `r_hat(θ_n)` within 5% of `r_hat(θ)` at the last row, and the capture
    /// depth equal to the reference depth on the last three rows.
    pub fn check(&self) -> NobleCheck {
        let mut problems = Vec::new();
        let rel =
            self.rows.last().and_then(|r| r.r_hat).map(|r| (r - self.reference_r_hat).abs() / self.reference_r_hat);
        match rel {
            Some(x) if x <= NOBLE_RADIUS_TOLERANCE => {}
            Some(x) => problems.push(format!("final radius mismatch {x:.4}")),
            None => problems.push("no radius at the last row".into()),
        }
        let tail = &self.rows[self.rows.len().saturating_sub(3)..];
        let stable = !tail.is_empty() && tail.iter().all(|r| r.depth == Some(self.reference_depth));
        if !stable {
            problems.push(format!(
                "capture depth not stable at {}: {:?}",
                self.reference_depth,
                tail.iter().map(|r| r.depth).collect::<Vec<_>>()
            ));
        }
        NobleCheck { passed: problems.is_empty(), final_relative_error: rel, depth_stable: stable, problems }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NobleCheck {
    pub passed: bool,
    pub final_relative_error: Option<f64>,
    pub depth_stable: bool,
    pub problems: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NobleOptions {
    pub series_order: usize,
    pub capture_budget: usize,
    pub safety: f64,
}

impl Default for NobleOptions {
    fn default() -> Self {
        NobleOptions { series_order: 1024, capture_budget: 200, safety: 0.9 }
    }
}

/// Radius and capture depth at `θ` and at its noble truncations `θ_n`.
///
/// Fails only when `a` is not captured at `θ` itself; per-row linearizer
/// failures are recorded in the row.
pub fn noble_radius_experiment<T: Real>(
    a: C64,
    cf: &CFExpansion,
    n_range: RangeInclusive<usize>,
    opts: &NobleOptions,
) -> Result<NobleTable> {
    let (reference_r_hat, depth) = radius_and_depth::<T>(a, cf, opts)?;
    let reference_depth = depth.ok_or_else(|| {
        Error::Precondition(format!("a = {a} is not captured at θ = {cf} within {} steps", opts.capture_budget))
    })?;
    let mut rows = Vec::new();
    for n in n_range {
        let trunc = noble_truncate(cf, n)?;
        let theta = cf_value::<f64>(&trunc);
        let row = match radius_and_depth::<T>(a, &trunc, opts) {
            Ok((r, d)) => NobleRow { n, cf: trunc.to_string(), theta, r_hat: Some(r), depth: d, note: None },
            Err(e) => NobleRow { n, cf: trunc.to_string(), theta, r_hat: None, depth: None, note: Some(e.to_string()) },
        };
        rows.push(row);
    }
    Ok(NobleTable { a, cf: cf.clone(), reference_r_hat, reference_depth, rows })
}

fn radius_and_depth<T: Real>(a: C64, cf: &CFExpansion, opts: &NobleOptions) -> Result<(f64, Option<usize>)> {
    let lambda = Complex::<T>::unit_turn(&cf_value::<T>(cf));
    let f = CubicMap::new(lambda, convert::<f64, T>(&a));
    let series = linearizer(&f, opts.series_order)?;
    let r = series.radius()?;
    let (cp, cm) = f.critical_points();
    let depth = [cp, cm]
        .iter()
        .filter_map(|c| match capture_test(&f, &series, c, opts.capture_budget, opts.safety) {
            Ok(CaptureVerdict::Landed { k, .. }) => Some(k),
            _ => None,
        })
        .min();
    Ok((r, depth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::XReal;

    #[test]
    fn degenerate_q2_is_refused() {
        let opts = BnScalingOptions { radius_order: 256, ..Default::default() };
        let t = bn_scaling_experiment::<XReal>(C64::new(0.0, 1.0), &CFExpansion::golden(), 0..=6, &opts).unwrap();
        let refused = t.refused().unwrap();
        assert_eq!(refused.q, 2);
        assert_eq!(t.rows.last().unwrap().status, RowStatus::Refused);
        assert!(!t.check(0).passed);
    }

    #[test]
    fn origin_skips_odd_stages() {
        let opts = BnScalingOptions { radius_order: 256, ..Default::default() };
        let t = bn_scaling_experiment::<XReal>(C64::new(0.0, 0.0), &CFExpansion::golden(), 0..=8, &opts).unwrap();
        for r in &t.rows {
            let skipped = r.status == RowStatus::ParitySkipped;
            assert_eq!(skipped, r.q % 2 == 1, "{r:?}");
        }
        let computed: Vec<i128> = t.tail().iter().map(|r| r.q).collect();
        assert_eq!(computed, vec![2, 8, 34]);
    }

    #[test]
    fn q1_row_reads_log_abs_a() {
        let a = C64::new(0.3, 0.1);
        let opts = BnScalingOptions { radius_order: 256, ..Default::default() };
        let t = bn_scaling_experiment::<XReal>(a, &CFExpansion::golden(), 0..=1, &opts).unwrap();
        for r in &t.rows {
            assert_eq!(r.q, 1);
            assert!((r.root_growth.unwrap() - a.norm().ln()).abs() < 1e-12);
        }
        // Pre-asymptotic rows are never part of the tail check.
        assert!(t.tail().is_empty());
    }

    #[test]
    fn noble_cf_rows_are_identical() {
        let lambda = C64::unit_turn(&cf_value::<f64>(&CFExpansion::golden()));
        let a = 2.0 * lambda.sqrt();
        let opts = NobleOptions { series_order: 256, ..Default::default() };
        let t = noble_radius_experiment::<f64>(a, &CFExpansion::golden(), 1..=4, &opts).unwrap();
        assert_eq!(t.reference_depth, 1);
        for r in &t.rows {
            assert_eq!(r.r_hat, Some(t.reference_r_hat));
            assert_eq!(r.depth, Some(1));
        }
        assert!(t.check().passed);
    }

    #[test]
    fn uncaptured_parameter_is_rejected() {
        let opts = NobleOptions { series_order: 128, ..Default::default() };
        let r = noble_radius_experiment::<f64>(C64::new(0.0, 0.0), &CFExpansion::golden(), 1..=2, &opts);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }
}

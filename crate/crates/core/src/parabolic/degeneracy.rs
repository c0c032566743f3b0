use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::stage::b_normal_form;
use crate::bifurc::GridSpec;
use crate::error::Result;
use crate::numerics::{convert, ComplexExt, Real};
use crate::C64;

/// Default flagging threshold relative to the grid median of `|b|`.
pub const DEFAULT_DEGENERACY_THRESHOLD: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroProximityCell {
    pub a: C64,
    /// `log|b(a)|`, `-inf` at an exact zero.
    pub log_abs_b: f64,
    pub flagged: bool,
}

/// `|b|` over a parameter grid with near-zero cells flagged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroProximity {
    pub spec: GridSpec,
    pub q: i128,
    pub threshold: f64,
    /// `log` of the median of `|b|` over the grid.
    pub log_median: f64,
    pub cells: Vec<ZeroProximityCell>,
}

impl ZeroProximity {
    pub fn any_flagged(&self) -> bool {
        self.cells.iter().any(|c| c.flagged)
    }

    pub fn flagged_points(&self) -> Vec<C64> {
        self.cells.iter().filter(|c| c.flagged).map(|c| c.a).collect()
    }
}

/// Flags grid cells where `|b(a)| < threshold · median |b|`.
///
/// `b` is a polynomial of degree at most `q` in `a`, so its zeros are isolated
/// and show up as sharp dips of `|b|`. Values come from the formal normal form
/// ([`b_normal_form`]), which costs `O(q²)` per cell and does not suffer the
/// cancellation of the iterated jet. Work happens in logarithms since `|b|`
/// overflows `f64` for large `q`.
pub fn nondegenerate_test<T: Real>(
    lambda_n: &Complex<T>,
    q: i128,
    spec: &GridSpec,
    threshold: f64,
) -> Result<ZeroProximity> {
    spec.validate()?;
    let logs: Vec<f64> = spec
        .points()
        .map(|a| {
            let nf = b_normal_form(lambda_n, &convert::<f64, T>(&a), q)?;
            Ok(if nf.is_negligible() { f64::NEG_INFINITY } else { nf.b.cabs().ln_abs_f64() })
        })
        .collect::<Result<_>>()?;
    let mut sorted = logs.clone();
    sorted.sort_by(f64::total_cmp);
    let log_median = sorted[sorted.len() / 2];
    let cut = log_median + threshold.ln();
    let cells =
        spec.points().zip(&logs).map(|(a, &l)| ZeroProximityCell { a, log_abs_b: l, flagged: l < cut }).collect();
    Ok(ZeroProximity { spec: *spec, q, threshold, log_median, cells })
}

/// Local gate used before trusting a stage at `a`: a 3×3 grid of half-width
/// `1/q` around `a` (the zero spacing of a degree-`q` polynomial), with the
/// centre cell required unflagged.
pub fn nondegenerate_at<T: Real>(lambda_n: &Complex<T>, q: i128, a: C64, threshold: f64) -> Result<bool> {
    let spec = GridSpec::new(a, 1.0 / q.max(1) as f64, 3)?;
    let z = nondegenerate_test(lambda_n, q, &spec, threshold)?;
    Ok(!z.cells[4].flagged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parabolic::rational_multiplier;

    #[test]
    fn q2_flags_the_zeros_of_one_plus_a_squared() {
        let lambda = C64::new(-1.0, 0.0);
        for centre in [C64::new(0.0, 1.0), C64::new(0.0, -1.0)] {
            let spec = GridSpec::new(centre, 0.5, 5).unwrap();
            let z = nondegenerate_test(&lambda, 2, &spec, DEFAULT_DEGENERACY_THRESHOLD).unwrap();
            assert_eq!(z.flagged_points(), vec![centre]);
        }
    }

    #[test]
    fn q1_flags_origin() {
        let spec = GridSpec::new(C64::new(0.0, 0.0), 0.3, 7).unwrap();
        let z = nondegenerate_test(&C64::new(1.0, 0.0), 1, &spec, DEFAULT_DEGENERACY_THRESHOLD).unwrap();
        assert_eq!(z.flagged_points(), vec![C64::new(0.0, 0.0)]);
    }

    #[test]
    fn zero_free_region_has_no_flags() {
        let spec = GridSpec::new(C64::new(2.0, 0.0), 0.5, 6).unwrap();
        let z = nondegenerate_test(&C64::new(-1.0, 0.0), 2, &spec, DEFAULT_DEGENERACY_THRESHOLD).unwrap();
        assert!(!z.any_flagged());
    }

    #[test]
    fn local_gate() {
        let lambda = C64::new(-1.0, 0.0);
        assert!(!nondegenerate_at(&lambda, 2, C64::new(0.0, 1.0), DEFAULT_DEGENERACY_THRESHOLD).unwrap());
        assert!(nondegenerate_at(&lambda, 2, C64::new(0.3, 0.1), DEFAULT_DEGENERACY_THRESHOLD).unwrap());
        let l8 = rational_multiplier::<f64>(5, 8).unwrap();
        assert!(nondegenerate_at(&l8, 8, C64::new(0.0, 0.0), DEFAULT_DEGENERACY_THRESHOLD).unwrap());
    }
}

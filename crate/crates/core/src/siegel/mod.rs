//! Linearization of the Siegel fixed point: the inverse linearizer `ψ`, the
//! coordinate `φ = ψ^{-1}`, conformal radius, capture detection, and the
//! harmonic conjugate of `log r_θ` along parameter paths.

mod capture;
mod coordinate;
mod harmonic;
mod linearizer;

pub use capture::{capture_test, CaptureKind, CaptureVerdict, DEFAULT_CAPTURE_BUDGET, DEFAULT_SAFETY};
pub use harmonic::{u_along_path, HarmonicIncrements};
pub use linearizer::{
    conformal_radius, conformal_radius_coeffs, linearizer, LinearizationSeries, DEFAULT_MEMBERSHIP_ORDER,
    DEFAULT_RADIUS_ORDER, MIN_RADIUS_ORDER,
};

use crate::cubic::CubicMap;
use crate::error::Result;
use crate::numerics::Real;
use crate::C64;

/// `log r_hat` of the Siegel map `(λ, a)` at series order `order`, for use as
/// the real part in [`u_along_path`].
pub fn log_radius<T: Real>(lambda: &num_complex::Complex<T>, a: C64, order: usize) -> Result<f64> {
    let map = CubicMap::new(lambda.clone(), crate::numerics::convert(&a));
    Ok(linearizer(&map, order)?.radius()?.ln())
}

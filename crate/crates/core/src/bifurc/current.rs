use serde::{Deserialize, Serialize};

use super::{GridSpec, Raster};
use crate::error::{Error, Result};

/// Mask fraction above which a density field is flagged as unreliable.
pub const MASK_WARNING_FRACTION: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentDensity {
    pub spec: GridSpec,
    /// Per-cell mass `ΔL · h² / 2π`; `None` on masked cells.
    pub mass: Vec<Option<f64>>,
    pub total: f64,
    pub mask_fraction: f64,
    pub warning: bool,
}

/// Discrete slice current `dd^c L` of a raster's Lyapunov field.
pub fn slice_current_density(raster: &Raster) -> Result<CurrentDensity> {
    let field: Vec<Option<f64>> = raster.cells.iter().map(|c| c.lyapunov).collect();
    current_from_field(&raster.spec, &field)
}

/// Five-point Laplacian of `field` times cell area over `2π`, so that
/// `log|a − a₀|` contributes unit mass at `a₀`. Border cells, undecided cells
/// and cells with an undecided neighbour are masked.
pub fn current_from_field(spec: &GridSpec, field: &[Option<f64>]) -> Result<CurrentDensity> {
    spec.validate()?;
    if field.len() != spec.len() {
        return Err(Error::Precondition(format!("field has {} cells, grid has {}", field.len(), spec.len())));
    }
    let n = spec.resolution;
    let at = |r: usize, c: usize| field[r * n + c];
    let mut mass = vec![None; field.len()];
    for r in 1..n.saturating_sub(1) {
        for c in 1..n - 1 {
            if let (Some(x), Some(e), Some(w), Some(s), Some(no)) =
                (at(r, c), at(r, c + 1), at(r, c - 1), at(r + 1, c), at(r - 1, c))
            {
                // (Σ − 4x)/h² · h² / 2π
                mass[r * n + c] = Some((e + w + s + no - 4.0 * x) / std::f64::consts::TAU);
            }
        }
    }
    let total = mass.iter().flatten().sum();
    let masked = mass.iter().filter(|m| m.is_none()).count();
    let mask_fraction = masked as f64 / mass.len() as f64;
    Ok(CurrentDensity { spec: *spec, mass, total, mask_fraction, warning: mask_fraction > MASK_WARNING_FRACTION })
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// A square grid of parameter cells.
///
/// Cells are indexed row-major, row 0 at the top (largest imaginary part),
/// column 0 at the left; cell `(i, j)` is represented by its centre.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub center: C64,
    pub half_width: f64,
    pub resolution: usize,
}

impl GridSpec {
    pub fn new(center: C64, half_width: f64, resolution: usize) -> Result<Self> {
        let g = GridSpec { center, half_width, resolution };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::Precondition(format!("grid resolution must be >= 2, got {}", self.resolution)));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::Precondition(format!("grid half-width must be positive, got {}", self.half_width)));
        }
        if !(self.center.re.is_finite() && self.center.im.is_finite()) {
            return Err(Error::Precondition("grid centre must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn is_empty(&self) -> bool {
        self.resolution == 0
    }

    /// Side length of one cell.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.resolution as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing() * self.spacing()
    }

    /// Centre of cell `(row, col)`.
    pub fn point(&self, row: usize, col: usize) -> C64 {
        let n = self.resolution as f64;
        let x = (2.0 * col as f64 + 1.0) / n - 1.0;
        let y = 1.0 - (2.0 * row as f64 + 1.0) / n;
        C64::new(self.center.re + self.half_width * x, self.center.im + self.half_width * y)
    }

    /// Centre of the cell with row-major index `idx`.
    pub fn point_at(&self, idx: usize) -> C64 {
        self.point(idx / self.resolution, idx % self.resolution)
    }

    /// Row-major cell centres.
    pub fn points(&self) -> impl Iterator<Item = C64> + '_ {
        (0..self.len()).map(move |i| self.point_at(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_resolution_hits_centre_exactly() {
        let g = GridSpec::new(C64::new(0.0, 1.0), 0.5, 5).unwrap();
        assert_eq!(g.point(2, 2), C64::new(0.0, 1.0));
        assert_eq!(g.len(), 25);
    }

    #[test]
    fn row_major_top_left_first() {
        let g = GridSpec::new(C64::new(0.0, 0.0), 1.0, 2).unwrap();
        let pts: Vec<C64> = g.points().collect();
        assert_eq!(pts, vec![C64::new(-0.5, 0.5), C64::new(0.5, 0.5), C64::new(-0.5, -0.5), C64::new(0.5, -0.5)]);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(GridSpec::new(C64::new(0.0, 0.0), 1.0, 1).is_err());
        assert!(GridSpec::new(C64::new(0.0, 0.0), 0.0, 4).is_err());
        assert!(GridSpec::new(C64::new(f64::NAN, 0.0), 1.0, 4).is_err());
    }
}

//! Parameter-plane rasters (capture classification, Lyapunov field, discrete
//! slice current) and the packaged scaling and noble-approximation
//! experiments.

mod current;
mod experiments;
mod grid;
mod pgm;
mod raster;

pub use current::{current_from_field, slice_current_density, CurrentDensity, MASK_WARNING_FRACTION};
pub use experiments::{
    bn_scaling_experiment, noble_radius_experiment, BnRow, BnScalingOptions, BnScalingTable, NobleCheck, NobleOptions,
    NobleRow, NobleTable, RowStatus, ScalingCheck, NOBLE_RADIUS_TOLERANCE, SCALING_TOLERANCE,
};
pub use grid::GridSpec;
pub use pgm::{class_level, class_map_pgm, PGM_CAPTURE_STEP, PGM_ESCAPE, PGM_UNDECIDED};
pub use raster::{
    capture_centre, classify_cell, classify_raster, lyapunov_raster, Budgets, CellClass, Raster, RasterCell,
};

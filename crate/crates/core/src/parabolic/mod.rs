//! The rational approximants `λ_n = e^{2πi p_n/q_n}`: parabolic coefficients
//! `b_n`, near-parabolic return probes in Siegel coordinates, fixed-point
//! counts and the Jellouli statistic.

mod degeneracy;
mod fixed;
mod jellouli;
mod probe;
mod stage;

pub use degeneracy::{
    nondegenerate_at, nondegenerate_test, ZeroProximity, ZeroProximityCell, DEFAULT_DEGENERACY_THRESHOLD,
};
pub use fixed::{contour_winding, count_fixed_points, ContourWinding, FixedPointCount, MAX_CONTOUR_SAMPLES};
pub use jellouli::{jellouli_stat, jellouli_with, JellouliSampling, JellouliStat};
pub use probe::{
    band_verdict, petal_probe, winding_experiment, PetalProbe, PetalVerdict, WindingControl, WindingReport,
    WindingSample, BAND_EDGE_MARGIN,
};
pub use stage::{
    b_n_compute, b_normal_form, parity_forced_zero, rational_multiplier, stage_for, NormalFormCoefficient,
    ParabolicStage, StageSummary, DEFAULT_MAX_STAGE_BITS,
};

//! Scalar types, complex helpers and truncated power-series arithmetic.

mod complex;
mod jet;
mod real;
mod xreal;

pub use complex::{convert, ComplexExt};
pub use jet::{cubic_jet, mul_balanced, mul_full, mul_naive, mul_truncated, Jet, KARATSUBA_THRESHOLD};
pub use real::Real;
pub use xreal::{set_working_precision, with_precision, working_precision, XReal, DEFAULT_PRECISION, MIN_PRECISION};

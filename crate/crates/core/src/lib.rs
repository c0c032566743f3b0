//! Numerical laboratory for the cubic family `f(z) = λz + az² + z³` with an
//! indifferent fixed point at the origin.
//!
//! All algorithms are generic over a [`Real`] scalar. Use the `f64` aliases
//! for fast exploratory work and the extended-precision ones (MPFR-backed,
//! unbounded-for-practical-purposes exponent) wherever magnitudes like
//! `|b_n| ≈ r^{-q_n}` appear.

pub mod bifurc;
pub mod cubic;
pub mod error;
pub mod numerics;
pub mod parabolic;
pub mod rotation;
pub mod siegel;

pub use error::{Error, Result};
pub use numerics::{ComplexExt, Jet, Real, XReal};

/// Extended-precision complex scalar.
pub type XComplex = num_complex::Complex<XReal>;
/// Hardware double complex scalar.
pub type C64 = num_complex::Complex<f64>;
/// Jet over extended-precision coefficients.
pub type XJet = Jet<XReal>;
/// Jet over `f64` coefficients.
pub type Jet64 = Jet<f64>;

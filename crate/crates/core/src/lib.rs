//! S-curves and equilibrium measures in polynomial external fields.
//!
//! The numerical pipeline: discretize an admissible contour, solve the inner
//! equilibrium problem, deform the contour by ascent on the equilibrium
//! energy, recover `R = (C^mu + V'/2)^2` from moments, and check the result
//! against the critical trajectories of `-R dz^2`.
//!
//! Arithmetic-only pieces (polynomials, measures, moments, metrics) are
//! generic over [`scalar::Real`]; the aliases below fix `f64`.

#[cfg(feature = "extended")]
pub mod dd;
pub mod equilibrium;
pub mod error;
pub mod geometry;
pub mod measure;
pub mod ortho;
pub mod poly;
pub mod quaddiff;
pub mod scalar;
pub mod scurve;
pub mod serde_pts;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
pub type Poly = poly::ComplexPolynomial<f64>;
pub type Measure = measure::DiscreteMeasure<f64>;
pub type Bumps = measure::PerturbationField<f64>;

#[cfg(feature = "extended")]
pub type PolyDd = poly::ComplexPolynomial<dd::DoubleDouble>;

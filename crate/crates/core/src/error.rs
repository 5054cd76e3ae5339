use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid external field: {0}")]
    InvalidField(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("crossing partition: blocks {0:?} and {1:?} interleave")]
    CrossingPartition(Vec<usize>, Vec<usize>),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("singular evaluation at support node {index} ({point})")]
    SingularEvaluation { index: usize, point: Complex64 },

    #[error("root finding did not converge after {iterations} iterations")]
    IterationFailure {
        iterations: usize,
        best: Vec<Complex64>,
    },

    #[error("pushforward step too large: |t| * Lip(h) = {0:.3} >= 1")]
    StepTooLarge(f64),

    #[error("energy unbounded below on the discretized contour")]
    UnboundedEnergy,

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("contour entered the forbidden region at {0}")]
    ConstraintViolation(Complex64),

    #[error("ill-conditioned system: condition estimate {condition:.3e} exceeds {limit:.3e}")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("outer ascent stalled with criticality residual {residual:.3e}")]
    Stagnation {
        residual: f64,
        best: Box<crate::scurve::SCurveSolution>,
    },

    #[error("branch tracking failed near {0}")]
    BranchTracking(Complex64),
}

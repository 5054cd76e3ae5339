//! Command-line driver: problem specs in, solution / trajectory / moment
//! reports and SVG plots out.
//!
//! Exit codes:
//! - `0`: success (a certified solution, a confirmed check, a full report);
//! - `1`: invalid input or a failure with no usable output;
//! - `2`: output written but not certified (no convergence, residual
//!   mismatch in `check`, failed degrees in an orthogonal-polynomial report).

pub mod commands;
pub mod plot;
pub mod spec;

use scurve_core::Error;
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_UNCERTIFIED: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot access {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io(..) => "io",
            CliError::Schema(_) => "schema",
            CliError::Core(e) => match e {
                Error::InvalidField(_) => "invalid_field",
                Error::Validation(_) => "validation",
                Error::CrossingPartition(..) => "crossing_partition",
                Error::Configuration(_) => "configuration",
                Error::SingularEvaluation { .. } => "singular_evaluation",
                Error::IterationFailure { .. } => "iteration_failure",
                Error::StepTooLarge(_) => "step_too_large",
                Error::UnboundedEnergy => "unbounded_energy",
                Error::Convergence { .. } => "convergence",
                Error::ConstraintViolation(_) => "constraint_violation",
                Error::IllConditioned { .. } => "ill_conditioned",
                Error::Stagnation { .. } => "stagnation",
                Error::BranchTracking(_) => "branch_tracking",
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Diagnostic {
    pub schema: &'static str,
    pub status: &'static str,
    pub kind: &'static str,
    pub message: String,
}

impl From<&CliError> for Diagnostic {
    fn from(e: &CliError) -> Self {
        Self {
            schema: scurve_core::scurve::SCHEMA,
            status: "error",
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

/// What a command produced: the exit code and a JSON summary for stdout.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub summary: serde_json::Value,
}

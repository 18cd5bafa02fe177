use thiserror::Error;

use crate::fixedpoint::FixedPointReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Jacobi-preconditioned CG ran out of iterations. The best iterate is kept
    /// so callers can decide whether it is usable.
    #[error("cg did not converge in {iterations} iterations (relative residual {relative_residual:e})")]
    CgNotConverged {
        x: Vec<f64>,
        iterations: usize,
        relative_residual: f64,
    },

    #[error("singular system: {0}")]
    Singular(String),

    /// The fixed-point iteration of an implicit step failed to converge.
    #[error("fixed-point iteration failed: {:?} after {} iterations", .0.status, .0.iterations)]
    FixedPoint(Box<FixedPointReport>),

    /// A reference solver (Newton or problem-specific Picard) failed; the
    /// oracle cannot be trusted at this step size.
    #[error("{solver} did not converge: residual {residual:e} after {iterations} iterations")]
    OracleNotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

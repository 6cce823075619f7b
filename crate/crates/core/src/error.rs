use thiserror::Error;

/// Errors raised by the semigroup, transport and curvature routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QmsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("state is not faithful (smallest eigenvalue {min_eig:.3e})")]
    NotFaithful { min_eig: f64 },

    #[error("generator has no jump modes after projection (raw operators proportional to the identity)")]
    DegenerateGenerator,

    #[error("generator is not primitive (kernel dimension {kernel_dim})")]
    NotPrimitive { kernel_dim: usize },

    #[error("generator invariant violated: {condition} (residual {residual:.3e}, tolerance {tolerance:.1e})")]
    InvariantViolation {
        condition: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("geodesic left the faithful states at s = {s:.4} (smallest eigenvalue {min_eig:.3e})")]
    BoundaryHit { s: f64, min_eig: f64 },

    #[error("integration failed: {0}")]
    IntegrationError(String),

    #[error("precondition not met: {0}")]
    PreconditionNotMet(String),

    #[error("internal error: {0}")]
    InternalError(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, QmsError>;

/// Non-fatal signal that an iterative solver ran out of budget.
///
/// Solvers return their best iterate together with this warning instead of
/// failing.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConvergenceWarning {
    pub iterations: usize,
    pub residual: f64,
    pub message: String,
}

impl std::fmt::Display for ConvergenceWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} after {} iterations (residual {:.3e})",
            self.message, self.iterations, self.residual
        )
    }
}

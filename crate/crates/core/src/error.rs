use thiserror::Error;

/// Errors raised by the coherence toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A matrix that must be Hermitian deviates from its adjoint.
    #[error("matrix is not Hermitian (max |H - H^dagger| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A state or certificate violates one of its defining invariants.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A dual certificate fails one of its feasibility constraints.
    #[error("infeasible certificate: {constraint} (residual {residual:.3e})")]
    InfeasibleCertificate {
        constraint: &'static str,
        residual: f64,
    },

    /// Malformed state file input.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

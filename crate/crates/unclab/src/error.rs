use thiserror::Error;

/// Errors surfaced by the library.
///
/// Dimension and invariant violations are reported eagerly at operation entry
/// rather than being repaired silently; callers that feed non-Hermitian data
/// into Hermitian-expecting operations get an error, not a symmetrized answer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not Hermitian (deviation {deviation:.3e}, tolerance {tolerance:.3e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("matrix is not a contraction (operator norm {0:.17})")]
    NotContraction(f64),

    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("index mismatch: {0}")]
    IndexMismatch(String),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

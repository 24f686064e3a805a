use thiserror::Error;

/// Errors produced by state construction, kernel evaluation, the numeric
/// oracle, and the learning routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A constructed state violates a physicality requirement.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The requested operation is not defined for this configuration.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// An input collection is empty where at least one element is required.
    #[error("empty input: {0}")]
    Empty(String),

    /// Fock-space truncation did not converge below the hard cutoff limit.
    #[error("cutoff search exceeded the limit of {limit}: {reason}")]
    CutoffExceeded { limit: usize, reason: String },

    /// A phase-space grid does not contain the states it must integrate.
    #[error("phase-space grid too small: {0}")]
    GridTooSmall(String),

    /// A Gram matrix failed its positive-semidefiniteness check.
    #[error("matrix is not positive semidefinite: {0}")]
    NotPsd(String),

    /// A linear system could not be solved reliably.
    #[error("singular system: {0}")]
    SingularSystem(String),

    /// Input data is malformed.
    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

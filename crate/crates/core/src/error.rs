use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("cannot parse {input:?} as a rational number")]
    ParseRational { input: String },

    #[error("malformed system JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("mode index {index} out of range (system has {modes} modes, indices are 1-based)")]
    InvalidMode { index: usize, modes: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("state limit of {limit} subspaces exceeded while exploring the automaton")]
    StateLimit { limit: usize },

    #[error("certificate inapplicable: {0}")]
    CertificateInapplicable(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

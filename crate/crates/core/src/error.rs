use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported operator: {0}")]
    UnsupportedOperator(String),

    #[error("degenerate block: {0}")]
    DegenerateBlock(String),

    #[error("matrix is not positive definite (pivot {pivot}); try a larger nugget eta")]
    NotPositiveDefinite { pivot: usize },

    #[error("Gauss-Newton step is singular at iteration {iteration}")]
    SingularStep { iteration: usize },

    #[error("Gauss-Newton diverged at iteration {iteration} (non-finite loss)")]
    Divergence { iteration: usize },

    #[error("reference oracle failed: {0}")]
    Oracle(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag used in the `status` column of result records.
    pub fn status(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } | Error::InvalidArgument(_) | Error::Parse(_) => {
                "config-error"
            }
            Error::UnsupportedOperator(_) => "unsupported-operator",
            Error::DegenerateBlock(_) => "degenerate-block",
            Error::NotPositiveDefinite { .. } => "not-positive-definite",
            Error::SingularStep { .. } => "singular-step",
            Error::Divergence { .. } => "diverged",
            Error::Oracle(_) => "oracle-error",
            Error::Io(_) => "io-error",
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

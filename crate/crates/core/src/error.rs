use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoarmaError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("shape error: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("{what} did not converge after {iterations} iterations: {detail}")]
    NoConvergence {
        what: String,
        iterations: usize,
        detail: String,
    },
    #[error("numeric failure at t={t}: {detail}")]
    Numeric { t: usize, detail: String },
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("optimization failed: {0}")]
    Optimization(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CoarmaError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Self::Domain(msg.into())
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse { .. } | Self::Domain(_) | Self::Unsupported(_) | Self::Shape { .. } => 2,
            Self::NoConvergence { .. } | Self::Numeric { .. } | Self::Optimization(_) => 3,
            Self::Io(_) => 4,
        }
    }
}

impl From<std::io::Error> for CoarmaError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CoarmaError>;

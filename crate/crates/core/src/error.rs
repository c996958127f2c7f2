use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid order m = {m}: {reason}")]
    InvalidOrder { m: usize, reason: String },

    #[error("partition rejected: {0}")]
    RejectedPartition(String),

    #[error("pruning contract violated: {0}")]
    Contract(String),

    #[error("operation budget exceeded: about {estimate:.3e} operations, budget {budget:.3e}")]
    BudgetExceeded { estimate: f64, budget: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn order(m: usize, reason: impl Into<String>) -> Self {
        Error::InvalidOrder {
            m,
            reason: reason.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

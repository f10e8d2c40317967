use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("search budget of {budget} nodes exceeded after exploring {explored} nodes")]
    BudgetExceeded { budget: u64, explored: u64 },

    #[error("enumeration budget of {budget} nodes exceeded; count lies in [{lower}, {upper}]")]
    CountOutOfBudget { budget: u64, lower: String, upper: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid poset: {0}")]
    InvalidPoset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

use thiserror::Error;

/// Errors produced anywhere in the modeling, sampling, embedding and
/// application layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("problem has {num_vars} variables; exact enumeration supports at most {limit}")]
    TooLarge { num_vars: usize, limit: usize },

    #[error("no embedding found after {attempts} attempts")]
    EmbeddingFailure { attempts: usize },

    #[error("non-finite derivative at expansion point ({theta}, {phi}): {what}")]
    ExpansionPoint { theta: f64, phi: f64, what: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

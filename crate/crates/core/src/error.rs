use thiserror::Error;

/// Errors raised by the numvar toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("term overflow: {0}")]
    Overflow(String),

    #[error("duplicate term {value} at positions {first} and {second}")]
    Duplicate {
        value: i64,
        first: usize,
        second: usize,
    },

    #[error("invalid window: {0}")]
    Window(String),

    #[error("test function has no declared support radius")]
    Support,

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

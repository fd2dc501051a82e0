use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two g-values collided; the continuous model gives this probability zero.
    #[error("degenerate randomness: {0}")]
    DegenerateRandomness(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("score {score} is not supported for the {scheme} scheme")]
    UnsupportedScheme { score: String, scheme: String },

    #[error(
        "alpha = {alpha} is too small for B = {b} simulations; use at least B = {min_b}"
    )]
    InsufficientSimulation { alpha: f64, b: usize, min_b: usize },

    #[error("no critical value recorded for {0}")]
    MissingCritical(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

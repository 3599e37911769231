use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("channel matrix is rank deficient (rank {rank}, need {needed})")]
    Rank { rank: usize, needed: usize },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("sequence of length {n} is too short for context half-width {k} (need n > 2k)")]
    SequenceTooShort { n: usize, k: usize },

    #[error("instance too large for exhaustive enumeration ({size} candidates, limit {limit})")]
    TooLarge { size: u128, limit: u128 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }
}

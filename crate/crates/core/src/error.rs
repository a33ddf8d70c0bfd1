use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for {n_log2}-bit reversal")]
    IndexOutOfRange { index: usize, n_log2: u32 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid code spec: {0}")]
    InvalidSpec(String),

    #[error("rate above 1/2 unsupported: k = {k} > n/2 = {half}")]
    RateAboveHalf { k: usize, half: usize },

    #[error("interleaver set must have n/2 = {expected} entries, got {got}")]
    InterleaverSetSize { expected: usize, got: usize },

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

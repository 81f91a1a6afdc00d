use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid transform size {0}: must be a nonzero power of two")]
    InvalidSize(usize),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("path delay maps to tap {tap}, outside a channel of {taps} taps")]
    ProfileTooLong { tap: usize, taps: usize },

    #[error("channel memory {memory} exceeds cyclic prefix length {cp_len}")]
    CyclicPrefixTooShort { memory: usize, cp_len: usize },

    #[error("pilot template entry {0} is zero")]
    ZeroPilot(usize),

    #[error("kappa estimate is degenerate: |sum of mu*h taps| = {0:e}")]
    DegenerateKappa(f64),

    #[error("training design is rank deficient at bin {0}")]
    SingularFit(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared by the simulation, estimator and test modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Waiting-time analysis needs at least two detections.
    #[error("too few events")]
    TooFewEvents,

    /// Consecutive threshold crossings came out of order; the transition
    /// offsets are too large for the event spacing.
    #[error("non-monotonic threshold crossings at event {index}")]
    NonMonotonicCrossings { index: u64 },

    #[error("bit stream lengths differ: {left} vs {right}")]
    LengthMismatch { left: u64, right: u64 },

    #[error("empty bit stream")]
    EmptyStream,

    /// A constant stream has zero variance, so autocorrelation is undefined.
    #[error("constant bit stream")]
    ConstantStream,

    #[error("lag {lag} too large for a stream of {n_bits} bits")]
    LagTooLarge { lag: u64, n_bits: u64 },

    #[error("invalid block length: {0}")]
    InvalidBlockLength(String),

    #[error("block of {got} bits is shorter than the required {need}")]
    BlockTooShort { got: u64, need: u64 },

    /// The runs test's frequency precheck failed; the battery maps this
    /// to p = 0 per the NIST convention.
    #[error("frequency prerequisite failed")]
    PrerequisiteFailed,

    #[error("input contains no complete block")]
    NoCompleteBlock,

    #[error("empty input")]
    EmptyInput,

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { got: usize, need: usize },

    #[error("bad file format: {0}")]
    BadFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("sidecar: {0}")]
    Sidecar(#[from] serde_json::Error),
}

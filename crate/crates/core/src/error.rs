use thiserror::Error;

/// Errors raised by the detection pipeline and its building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("series too short: got {0} samples")]
    TooShort(usize),
    #[error("timestamps not strictly increasing at index {0}")]
    NonMonotonicTimestamps(usize),
    #[error("timestamp count {timestamps} does not match value count {values}")]
    TimestampLengthMismatch { values: usize, timestamps: usize },
    #[error("unparseable timestamp at index {index}: {value:?}")]
    BadTimestamp { index: usize, value: String },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("segment length {segment_length} exceeds series length {n}")]
    SegmentTooLong { segment_length: usize, n: usize },
    #[error("period {period} outside [2, {max}]")]
    PeriodOutOfRange { period: usize, max: usize },
    #[error("degenerate degrees of freedom: n={n}, l={l}")]
    DegenerateDf { n: usize, l: usize },
    #[error("argument outside the function domain: {0}")]
    DomainError(String),
    #[error("could not place anomaly region after {0} attempts")]
    PlacementExhausted(usize),
    #[error("cohort mean is zero; coefficient of variation undefined")]
    ZeroMean,
    #[error("weights sum to zero")]
    WeightSumZero,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam {
        name,
        reason: reason.into(),
    }
}

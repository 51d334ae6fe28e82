use thiserror::Error;

/// Errors raised by the coefficient math, feature, metric and simulation code.
///
/// Bitstream problems have their own type, [`crate::ParseError`].
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("quality factor {0} outside 1..=100")]
    QualityOutOfRange(i32),

    #[error("quantization entry {0} outside 1..=255")]
    InvalidQuantEntry(u32),

    #[error("recompression count {0} outside 1..=16")]
    InvalidK(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(&'static str),

    #[error("coefficient position ({0}, {1}) outside the 8x8 block")]
    PositionOutOfRange(usize, usize),

    #[error("dimensions {width}x{height} are not multiples of 8")]
    NotBlockAligned { width: usize, height: usize },

    #[error("invalid forgery spec: {0}")]
    SpecInvalid(&'static str),

    #[error("labels contain a single class")]
    DegenerateLabels,

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

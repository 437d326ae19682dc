use crate::tensor::Shape;

/// Crate-wide error type. All shape and parity violations are hard errors;
/// nothing is silently coerced.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: Shape, right: Shape },

    #[error("zero-area spatial shape {0} (h and w must be >= 1)")]
    ZeroSpatial(Shape),

    #[error("kernel size 0 is invalid")]
    ZeroKernel,

    #[error("kernel size {k} has the wrong parity for {context}")]
    ParityMismatch { k: usize, context: &'static str },

    #[error("channel mismatch: input has {input} channels, layer expects {expected}")]
    ChannelMismatch { input: usize, expected: usize },

    #[error("stride {0} unsupported (must be 1 or 2)")]
    InvalidStride(usize),

    #[error("{context}: {channels} channels not divisible by 4 (grouped symmetric padding needs c_i mod 4 == 0)")]
    ChannelsNotDivisibleBy4 { channels: usize, context: &'static str },

    #[error("tensor is all-zero; {0} is undefined")]
    AllZero(&'static str),

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

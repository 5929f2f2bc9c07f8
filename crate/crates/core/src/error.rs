use thiserror::Error;

/// Errors raised by ring-image arithmetic, entropy metrics and the mean-shift engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("shape mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    ShapeMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },

    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(u32),

    #[error("image must have positive width and height, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },

    #[error("pixel buffer holds {actual} values, expected {expected}")]
    PixelCount { expected: usize, actual: usize },

    #[error("value {value} at index {index} is not a residue modulo {modulus}")]
    ResidueOutOfRange {
        index: usize,
        value: u32,
        modulus: u32,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = RingError> = std::result::Result<T, E>;

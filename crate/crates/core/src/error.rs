use thiserror::Error;

/// Errors produced by the arithmetic, hashing and scheme layers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unsupported prime 2^{x} - 2^{y} + 1")]
    UnsupportedPrime { x: u32, y: u32 },
    #[error("operand is {bits} bits wide, datapath accepts at most {limit}")]
    OperandTooWide { bits: u32, limit: u32 },
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: String, right: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid length for {what}: expected {expected} bytes, got {got}")]
    InvalidLength {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("coefficient {value} out of range for {what}")]
    OutOfRange { what: &'static str, value: i64 },
    #[error("stream configured for {configured}-bit reads, asked for {requested}")]
    ModeMismatch { configured: u32, requested: u32 },
    #[error("invalid hex: {0}")]
    Hex(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}

impl From<hex::FromHexError> for Error {
    fn from(e: hex::FromHexError) -> Self {
        Error::Hex(e.to_string())
    }
}

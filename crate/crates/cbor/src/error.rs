use thiserror::Error;

/// Failures reported by the byte-level and deterministic CBOR layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Error)]
pub enum Error {
    #[error("output buffer too small")]
    BufferTooSmall,
    #[error("input truncated")]
    Truncated,
    #[error("reserved additional-information value")]
    ReservedInfo,
    #[error("indefinite-length encoding is not supported")]
    IndefiniteLength,
    #[error("simple value 24..31 or non-canonical simple encoding")]
    InvalidSimple,
    #[error("text string is not valid UTF-8")]
    InvalidUtf8,
    #[error("declared element count exceeds remaining input")]
    CountOverflow,
    #[error("invalid item")]
    Invalid,
    #[error("integer argument not in shortest form")]
    NonMinimalInt,
    #[error("map keys not in strictly increasing byte order")]
    UnsortedOrDuplicateKeys,
    #[error("duplicate map key")]
    DuplicateKey,
    #[error("nesting depth exceeds limit")]
    DepthExceeded,
    #[error("encoded size exceeds bound")]
    TooLarge,
    #[error("declared length or width does not match contents")]
    Malformed,
}

impl Error {
    /// Stable machine-readable name, used in reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::BufferTooSmall => "BufferTooSmall",
            Error::Truncated => "Truncated",
            Error::ReservedInfo => "ReservedInfo",
            Error::IndefiniteLength => "IndefiniteLength",
            Error::InvalidSimple => "InvalidSimple",
            Error::InvalidUtf8 => "InvalidUtf8",
            Error::CountOverflow => "CountOverflow",
            Error::Invalid => "Invalid",
            Error::NonMinimalInt => "NonMinimalInt",
            Error::UnsortedOrDuplicateKeys => "UnsortedOrDuplicateKeys",
            Error::DuplicateKey => "DuplicateKey",
            Error::DepthExceeded => "DepthExceeded",
            Error::TooLarge => "TooLarge",
            Error::Malformed => "Malformed",
        }
    }
}

impl From<crate::rec::StructuralError> for Error {
    fn from(e: crate::rec::StructuralError) -> Self {
        match e {
            crate::rec::StructuralError::Truncated => Error::Truncated,
            crate::rec::StructuralError::CountOverflow => Error::CountOverflow,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

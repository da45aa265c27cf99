use canon_cddl::runtime::{SerError, ValidationError, ValidationErrorKind};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoseError {
    #[error("input does not match the schema: {0}")]
    ParseFailure(ValidationError),
    #[error("input is not deterministically encoded: {0}")]
    NonDeterministicEncoding(canon_cbor::Error),
    #[error("signature does not verify")]
    SignatureInvalid,
    #[error("cannot serialize: {0}")]
    Serialize(SerError),
    #[error("payload is detached")]
    DetachedPayload,
    #[error("key has the wrong length")]
    BadKey,
    #[error("bytes follow the message")]
    TrailingBytes,
}

impl CoseError {
    pub fn code(&self) -> &'static str {
        match self {
            CoseError::ParseFailure(e) => e.kind.code(),
            CoseError::NonDeterministicEncoding(e) => e.code(),
            CoseError::SignatureInvalid => "SignatureInvalid",
            CoseError::Serialize(SerError::BufferTooSmall) => "BufferTooSmall",
            CoseError::Serialize(SerError::Sigma(r)) => r.code(),
            CoseError::DetachedPayload => "DetachedPayload",
            CoseError::BadKey => "BadKey",
            CoseError::TrailingBytes => "TrailingBytes",
        }
    }
}

impl From<ValidationError> for CoseError {
    fn from(e: ValidationError) -> Self {
        use canon_cbor::Error::*;
        match e.kind {
            ValidationErrorKind::Cbor(c @ (NonMinimalInt | UnsortedOrDuplicateKeys | DuplicateKey)) => {
                CoseError::NonDeterministicEncoding(c)
            }
            _ => CoseError::ParseFailure(e),
        }
    }
}

impl From<SerError> for CoseError {
    fn from(e: SerError) -> Self {
        CoseError::Serialize(e)
    }
}

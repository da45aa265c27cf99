//! COSE_Sign1 signing and verification on top of the CDDL runtime.
//!
//! Messages are validated and parsed against embedded schemas and must be
//! deterministically encoded. Signatures go through a [`CryptoProvider`];
//! [`FakeProvider`] is a hash-based stand-in for tests and, with the
//! `ed25519` feature, [`Ed25519Provider`] is the real thing.

mod crypto;
mod error;
mod headers;
mod key;
pub mod schema;
mod sign1;

#[cfg(feature = "ed25519")]
pub use crypto::Ed25519Provider;
pub use crypto::{CryptoProvider, FakeProvider};
pub use error::CoseError;
pub use headers::{Headers, Label};
pub use key::{parse_key_okp, OkpKey};
pub use sign1::{parse_sign1, sign1, sign1_to_vec, to_be_signed, verify1, Sign1Message};

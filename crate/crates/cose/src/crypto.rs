use sha2::{Digest, Sha512};

use crate::CoseError;

/// Ed25519-style signing: 32-byte keys, 64-byte signatures.
pub trait CryptoProvider {
    fn public_key(&self, secret: &[u8]) -> Result<[u8; 32], CoseError>;
    fn sign(&self, secret: &[u8], msg: &[u8]) -> Result<[u8; 64], CoseError>;
    fn verify(&self, public: &[u8], msg: &[u8], sig: &[u8; 64]) -> bool;
}

/// Deterministic stand-in: the public key is a hash of the secret and the
/// signature is `SHA-512("fake" || public || msg)`. Anyone can forge it.
#[derive(Debug, Clone, Copy, Default)]
pub struct FakeProvider;

impl FakeProvider {
    fn tag(public: &[u8], msg: &[u8]) -> [u8; 64] {
        let mut h = Sha512::new();
        h.update(b"fake");
        h.update(public);
        h.update(msg);
        h.finalize().into()
    }
}

impl CryptoProvider for FakeProvider {
    fn public_key(&self, secret: &[u8]) -> Result<[u8; 32], CoseError> {
        if secret.len() != 32 {
            return Err(CoseError::BadKey);
        }
        let digest = Sha512::digest(secret);
        Ok(digest[..32].try_into().expect("32 bytes"))
    }

    fn sign(&self, secret: &[u8], msg: &[u8]) -> Result<[u8; 64], CoseError> {
        Ok(Self::tag(&self.public_key(secret)?, msg))
    }

    fn verify(&self, public: &[u8], msg: &[u8], sig: &[u8; 64]) -> bool {
        public.len() == 32 && Self::tag(public, msg) == *sig
    }
}

#[cfg(feature = "ed25519")]
#[derive(Debug, Clone, Copy, Default)]
pub struct Ed25519Provider;

#[cfg(feature = "ed25519")]
impl Ed25519Provider {
    fn signing_key(secret: &[u8]) -> Result<ed25519_dalek::SigningKey, CoseError> {
        let bytes: &[u8; 32] = secret.try_into().map_err(|_| CoseError::BadKey)?;
        Ok(ed25519_dalek::SigningKey::from_bytes(bytes))
    }
}

#[cfg(feature = "ed25519")]
impl CryptoProvider for Ed25519Provider {
    fn public_key(&self, secret: &[u8]) -> Result<[u8; 32], CoseError> {
        Ok(Self::signing_key(secret)?.verifying_key().to_bytes())
    }

    fn sign(&self, secret: &[u8], msg: &[u8]) -> Result<[u8; 64], CoseError> {
        use ed25519_dalek::Signer;
        Ok(Self::signing_key(secret)?.sign(msg).to_bytes())
    }

    fn verify(&self, public: &[u8], msg: &[u8], sig: &[u8; 64]) -> bool {
        let Ok(public) = <&[u8; 32]>::try_from(public) else { return false };
        let Ok(key) = ed25519_dalek::VerifyingKey::from_bytes(public) else { return false };
        key.verify_strict(msg, &ed25519_dalek::Signature::from_bytes(sig)).is_ok()
    }
}

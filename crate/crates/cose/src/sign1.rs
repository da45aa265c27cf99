use std::borrow::Cow;

use canon_cddl::runtime::{parse, serialize, to_vec, Value};

use crate::schema::{header_map, sig_structure, sign1_tagged};
use crate::{CoseError, CryptoProvider, Headers};

/// A parsed COSE_Sign1 message borrowing from its encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct Sign1Message<'a> {
    /// Serialized protected headers, possibly empty.
    pub protected: &'a [u8],
    pub protected_headers: Headers,
    pub unprotected: Headers,
    /// `None` for a detached payload.
    pub payload: Option<&'a [u8]>,
    pub signature: &'a [u8],
}

fn bytes(b: &[u8]) -> Value<'_> {
    Value::Bytes(Cow::Borrowed(b))
}

fn borrowed<'a>(v: &Value<'a>) -> Option<&'a [u8]> {
    match v {
        Value::Bytes(Cow::Borrowed(b)) => Some(b),
        _ => None,
    }
}

fn serialize_headers(h: &Headers) -> Result<Vec<u8>, CoseError> {
    if h.is_empty() {
        return Ok(Vec::new());
    }
    Ok(to_vec(header_map(), &h.to_value())?)
}

/// Headers from a protected-header bucket: empty, or one canonical map.
fn protected_headers(protected: &[u8]) -> Result<Headers, CoseError> {
    if protected.is_empty() {
        return Ok(Headers::default());
    }
    let (v, rest) = parse(header_map(), protected)?;
    if !rest.is_empty() {
        return Err(CoseError::TrailingBytes);
    }
    Ok(Headers::from_value(&v).expect("value parsed under header_map"))
}

/// Encoded `Sig_structure` for a single signer.
pub fn to_be_signed(protected: &[u8], payload: &[u8], aad: &[u8]) -> Result<Vec<u8>, CoseError> {
    protected_headers(protected)?;
    let v =
        Value::right(Value::pair(Value::Unit, Value::pair(bytes(protected), Value::pair(bytes(aad), bytes(payload)))));
    Ok(to_vec(sig_structure(), &v)?)
}

/// Writes a tagged COSE_Sign1 message with an attached payload and empty
/// external AAD; returns its size.
pub fn sign1(
    cp: &dyn CryptoProvider,
    secret: &[u8],
    protected: &Headers,
    unprotected: &Headers,
    payload: &[u8],
    out: &mut [u8],
) -> Result<usize, CoseError> {
    let prot = serialize_headers(protected)?;
    let tbs = to_be_signed(&prot, payload, &[])?;
    let sig = cp.sign(secret, &tbs)?;
    let v = Value::pair(
        bytes(&prot),
        Value::pair(unprotected.to_value(), Value::pair(Value::left(bytes(payload)), bytes(&sig))),
    );
    Ok(serialize(sign1_tagged(), &v, out)?)
}

pub fn sign1_to_vec(
    cp: &dyn CryptoProvider,
    secret: &[u8],
    protected: &Headers,
    unprotected: &Headers,
    payload: &[u8],
) -> Result<Vec<u8>, CoseError> {
    let mut out = vec![0; payload.len() + 256];
    loop {
        match sign1(cp, secret, protected, unprotected, payload, &mut out) {
            Ok(n) => {
                out.truncate(n);
                return Ok(out);
            }
            Err(CoseError::Serialize(canon_cddl::runtime::SerError::BufferTooSmall)) => {
                let n = out.len() * 2;
                out.resize(n, 0);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Validates and parses a tagged COSE_Sign1 message occupying all of `msg`.
pub fn parse_sign1(msg: &[u8]) -> Result<Sign1Message<'_>, CoseError> {
    let (v, rest) = parse(sign1_tagged(), msg)?;
    if !rest.is_empty() {
        return Err(CoseError::TrailingBytes);
    }
    let Value::Pair(protected, rest) = &v else { unreachable!("COSE_Sign1 shape") };
    let Value::Pair(unprotected, rest) = &**rest else { unreachable!("COSE_Sign1 shape") };
    let Value::Pair(payload, signature) = &**rest else { unreachable!("COSE_Sign1 shape") };
    let protected = borrowed(protected).expect("bstr");
    Ok(Sign1Message {
        protected,
        protected_headers: protected_headers(protected)?,
        unprotected: Headers::from_value(unprotected).expect("value parsed under header_map"),
        payload: match &**payload {
            Value::Left(p) => Some(borrowed(p).expect("bstr")),
            _ => None,
        },
        signature: borrowed(signature).expect("bstr"),
    })
}

/// Returns the payload of `msg` if its signature verifies under `public`.
pub fn verify1<'m>(cp: &dyn CryptoProvider, public: &[u8], msg: &'m [u8]) -> Result<&'m [u8], CoseError> {
    let m = parse_sign1(msg)?;
    let payload = m.payload.ok_or(CoseError::DetachedPayload)?;
    let sig: &[u8; 64] = m.signature.try_into().map_err(|_| CoseError::SignatureInvalid)?;
    let tbs = to_be_signed(m.protected, payload, &[])?;
    if cp.verify(public, &tbs, sig) {
        Ok(payload)
    } else {
        Err(CoseError::SignatureInvalid)
    }
}

use std::borrow::Cow;

use canon_cddl::runtime::{parse, Table, Value};

use crate::schema::key_okp;
use crate::{CoseError, Label};

/// A COSE_Key of type OKP. The `1: 1` entry is implied.
#[derive(Debug, Clone, PartialEq)]
pub struct OkpKey<'a> {
    pub curve: Label,
    pub public: Option<&'a [u8]>,
    pub private: Option<&'a [u8]>,
    /// Remaining parameters, read lazily from the input.
    pub rest: Table<'a>,
}

fn field<'a>(v: &Value<'a>) -> Option<&'a [u8]> {
    match v {
        Value::Some(p) => match &**p {
            Value::Pair(_, b) => match &**b {
                Value::Bytes(Cow::Borrowed(b)) => Some(b),
                _ => unreachable!("bstr"),
            },
            _ => unreachable!("entry"),
        },
        _ => None,
    }
}

pub fn parse_key_okp(input: &[u8]) -> Result<OkpKey<'_>, CoseError> {
    let (v, rest) = parse(key_okp(), input)?;
    if !rest.is_empty() {
        return Err(CoseError::TrailingBytes);
    }
    let Value::Pair(_kty, rest) = v else { unreachable!("COSE_Key_OKP shape") };
    let Value::Pair(crv, rest) = *rest else { unreachable!() };
    let Value::Pair(public, rest) = *rest else { unreachable!() };
    let Value::Pair(private, table) = *rest else { unreachable!() };
    let Value::Pair(_, crv) = *crv else { unreachable!() };
    let curve = match *crv {
        Value::Left(n) => Label::Int(n.as_int().and_then(|n| i64::try_from(n).ok()).ok_or(CoseError::BadKey)?),
        Value::Right(t) => match *t {
            Value::Text(s) => Label::Text(s.into_owned()),
            _ => unreachable!(),
        },
        _ => unreachable!(),
    };
    let Value::Table(rest) = *table else { unreachable!() };
    Ok(OkpKey { curve, public: field(&public), private: field(&private), rest })
}

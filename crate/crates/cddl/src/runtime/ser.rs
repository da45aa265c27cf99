//! Serialization of values to deterministic CBOR.
//!
//! Container contents are written first and the header is slid in front
//! once the count is known. Map entries are kept sorted by inserting each
//! new entry at its place among the ones already written.

use canon_cbor::{encode_header, jump, serialize_det, Header, ItemRef, Major};
use thiserror::Error;

use super::check::{literal_parts, matches};
use super::value::{AnyItem, Value};
use crate::ast::{ArrayGroup, MapGroup, StrKind, TypeExpr};
use crate::elab::ElabSchema;

/// Why a value cannot be serialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SigmaReason {
    OutOfRange,
    DuplicateTableKey,
    ExcludedKey,
    /// The value's constructors do not follow the schema's shape.
    ShapeMismatch,
}

impl SigmaReason {
    pub fn code(self) -> &'static str {
        match self {
            SigmaReason::OutOfRange => "OutOfRange",
            SigmaReason::DuplicateTableKey => "DuplicateTableKey",
            SigmaReason::ExcludedKey => "ExcludedKey",
            SigmaReason::ShapeMismatch => "ShapeMismatch",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Error)]
pub enum SerError {
    #[error("output buffer too small")]
    BufferTooSmall,
    #[error("value not serializable: {}", .0.code())]
    Sigma(SigmaReason),
}

impl From<canon_cbor::Error> for SerError {
    fn from(_: canon_cbor::Error) -> Self {
        SerError::BufferTooSmall
    }
}

type Result<T> = std::result::Result<T, SerError>;

fn sigma<T>(r: SigmaReason) -> Result<T> {
    Err(SerError::Sigma(r))
}

struct Out<'b> {
    buf: &'b mut [u8],
    pos: usize,
}

impl Out<'_> {
    fn header(&mut self, major: Major, value: u64) -> Result<()> {
        self.pos += encode_header(Header::minimal(major, value), &mut self.buf[self.pos..])?;
        Ok(())
    }

    fn bytes(&mut self, b: &[u8]) -> Result<()> {
        let end = self.pos + b.len();
        if end > self.buf.len() {
            return Err(SerError::BufferTooSmall);
        }
        self.buf[self.pos..end].copy_from_slice(b);
        self.pos = end;
        Ok(())
    }

    fn int(&mut self, v: i128) -> Result<()> {
        if v >= 0 {
            self.header(Major::UInt, v as u64)
        } else {
            self.header(Major::NInt, (-1 - v) as u64)
        }
    }

    /// Moves `buf[start..pos]` right to make room for a header.
    fn prefix_header(&mut self, start: usize, major: Major, count: u64) -> Result<()> {
        let h = Header::minimal(major, count);
        let n = h.encoded_len();
        if self.pos + n > self.buf.len() {
            return Err(SerError::BufferTooSmall);
        }
        self.buf.copy_within(start..self.pos, start + n);
        encode_header(h, &mut self.buf[start..start + n])?;
        self.pos += n;
        Ok(())
    }
}

fn ser_type(t: &TypeExpr, v: &Value<'_>, out: &mut Out<'_>) -> Result<()> {
    match (t, v) {
        (TypeExpr::Any, Value::Any(AnyItem::Ref(r))) => out.bytes(r.bytes()),
        (TypeExpr::Any, Value::Any(AnyItem::Owned(x))) => {
            out.pos += serialize_det(x, &mut out.buf[out.pos..])?;
            Ok(())
        }
        (TypeExpr::LitInt(_) | TypeExpr::LitText(_) | TypeExpr::LitSimple(_), Value::Unit) => {
            let mut head = [0u8; 9];
            let (n, payload) = literal_parts(t, &mut head).ok_or(SerError::Sigma(SigmaReason::OutOfRange))?;
            out.bytes(&head[..n])?;
            out.bytes(payload)
        }
        (TypeExpr::Int, Value::UInt(_) | Value::NInt(_))
        | (TypeExpr::UInt, Value::UInt(_))
        | (TypeExpr::NInt, Value::NInt(_)) => out.int(v.as_int().expect("integer")),
        (TypeExpr::Range(lo, hi), Value::UInt(_) | Value::NInt(_)) => {
            let n = v.as_int().expect("integer");
            if !(*lo..=*hi).contains(&n) {
                return sigma(SigmaReason::OutOfRange);
            }
            out.int(n)
        }
        (TypeExpr::Tstr, Value::Text(s)) => {
            out.header(Major::Text, s.len() as u64)?;
            out.bytes(s.as_bytes())
        }
        (TypeExpr::Bstr, Value::Bytes(b)) => {
            out.header(Major::Bytes, b.len() as u64)?;
            out.bytes(b)
        }
        (TypeExpr::Sized { kind, lo, hi }, Value::Text(_) | Value::Bytes(_)) => {
            let (major, b) = match (kind, v) {
                (StrKind::Text, Value::Text(s)) => (Major::Text, s.as_bytes()),
                (StrKind::Bytes, Value::Bytes(b)) => (Major::Bytes, &b[..]),
                _ => return sigma(SigmaReason::ShapeMismatch),
            };
            if !(*lo..=*hi).contains(&(b.len() as u64)) {
                return sigma(SigmaReason::OutOfRange);
            }
            out.header(major, b.len() as u64)?;
            out.bytes(b)
        }
        (TypeExpr::Choice(a, _), Value::Left(x)) => ser_type(a, x, out),
        (TypeExpr::Choice(_, b), Value::Right(x)) => ser_type(b, x, out),
        (TypeExpr::Tagged(tag, t), v) => {
            out.header(Major::Tagged, *tag)?;
            ser_type(t, v, out)
        }
        (TypeExpr::Array(g), v) => {
            let start = out.pos;
            let count = ser_array_group(g, v, out)?;
            out.prefix_header(start, Major::Array, count)
        }
        (TypeExpr::Map(g), v) => {
            let start = out.pos;
            let mut count = 0;
            ser_map_group(g, v, out, start, &mut count)?;
            out.prefix_header(start, Major::Map, count)
        }
        _ => sigma(SigmaReason::ShapeMismatch),
    }
}

fn ser_array_group(g: &ArrayGroup, v: &Value<'_>, out: &mut Out<'_>) -> Result<u64> {
    match (g, v) {
        (ArrayGroup::Empty, Value::Unit) | (ArrayGroup::Opt(_), Value::None) => Ok(0),
        (ArrayGroup::Elem(t), v) => ser_type(t, v, out).map(|()| 1),
        (ArrayGroup::Concat(a, b), Value::Pair(x, y)) => Ok(ser_array_group(a, x, out)? + ser_array_group(b, y, out)?),
        (ArrayGroup::Alt(a, _), Value::Left(x))
        | (ArrayGroup::Alt(_, a), Value::Right(x))
        | (ArrayGroup::Opt(a), Value::Some(x)) => ser_array_group(a, x, out),
        (ArrayGroup::Star(a), Value::List(l)) => {
            let mut n = 0;
            for x in l.iter() {
                n += ser_array_group(a, &x, out)?;
            }
            Ok(n)
        }
        _ => sigma(SigmaReason::ShapeMismatch),
    }
}

fn ser_map_group(g: &MapGroup, v: &Value<'_>, out: &mut Out<'_>, region: usize, count: &mut u64) -> Result<()> {
    match (g, v) {
        (MapGroup::Empty, Value::Unit) | (MapGroup::Opt(_), Value::None) => Ok(()),
        (MapGroup::Entry { key, value, .. }, Value::Pair(k, x)) => {
            let at = out.pos;
            ser_type(key, k, out)?;
            let key_end = out.pos;
            ser_type(value, x, out)?;
            insert_sorted(out, region, *count, at, key_end)?;
            *count += 1;
            Ok(())
        }
        (MapGroup::Table { key, excluded, value }, Value::Table(t)) => {
            for (k, x) in t.iter() {
                let at = out.pos;
                ser_type(key, &k, out)?;
                let key_end = out.pos;
                ser_type(value, &x, out)?;
                let kref = ItemRef::parse(&out.buf[at..key_end]).expect("just written").0;
                let vref = ItemRef::parse(&out.buf[key_end..out.pos]).expect("just written").0;
                if excluded.iter().any(|a| matches(&a.key, kref) && matches(&a.value, vref)) {
                    return sigma(SigmaReason::ExcludedKey);
                }
                insert_sorted(out, region, *count, at, key_end)?;
                *count += 1;
            }
            Ok(())
        }
        (MapGroup::Concat(a, b), Value::Pair(x, y)) => {
            ser_map_group(a, x, out, region, count)?;
            ser_map_group(b, y, out, region, count)
        }
        (MapGroup::Alt(a, _), Value::Left(x))
        | (MapGroup::Alt(_, a), Value::Right(x))
        | (MapGroup::Opt(a), Value::Some(x)) => ser_map_group(a, x, out, region, count),
        _ => sigma(SigmaReason::ShapeMismatch),
    }
}

/// `buf[region..at]` holds `count` entries sorted by key bytes; the entry at
/// `at..pos` (key ending at `key_end`) is moved to its place.
fn insert_sorted(out: &mut Out<'_>, region: usize, count: u64, at: usize, key_end: usize) -> Result<()> {
    let buf = &mut *out.buf;
    let mut p = region;
    for _ in 0..count {
        let k = jump(&buf[p..]);
        match buf[p..p + k].cmp(&buf[at..key_end]) {
            std::cmp::Ordering::Less => p += k + jump(&buf[p + k..]),
            std::cmp::Ordering::Equal => return sigma(SigmaReason::DuplicateTableKey),
            std::cmp::Ordering::Greater => break,
        }
    }
    buf[p..out.pos].rotate_right(out.pos - at);
    debug_assert!(keys_increasing(&buf[region..out.pos], count + 1));
    Ok(())
}

/// Are the keys of `n` consecutive entries strictly increasing?
pub fn keys_increasing(entries: &[u8], n: u64) -> bool {
    let mut p = 0;
    let mut prev: Option<&[u8]> = None;
    for _ in 0..n {
        let k = jump(&entries[p..]);
        let key = &entries[p..p + k];
        if prev.is_some_and(|q| q >= key) {
            return false;
        }
        prev = Some(key);
        p += k + jump(&entries[p + k..]);
    }
    true
}

/// Writes the encoding of `v` under `es` into `out`; returns its size.
pub fn serialize(es: &ElabSchema, v: &Value<'_>, out: &mut [u8]) -> Result<usize> {
    let mut o = Out { buf: out, pos: 0 };
    ser_type(&es.ty, v, &mut o)?;
    Ok(o.pos)
}

pub fn to_vec(es: &ElabSchema, v: &Value<'_>) -> Result<Vec<u8>> {
    let mut buf = vec![0u8; 256];
    loop {
        match serialize(es, v, &mut buf) {
            Ok(n) => {
                buf.truncate(n);
                return Ok(buf);
            }
            Err(SerError::BufferTooSmall) => {
                let n = buf.len() * 2;
                buf.resize(n, 0);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Can `v` be serialized under `es`?
pub fn sigma_check(es: &ElabSchema, v: &Value<'_>) -> std::result::Result<(), SigmaReason> {
    match to_vec(es, v) {
        Ok(_) => Ok(()),
        Err(SerError::Sigma(r)) => Err(r),
        Err(SerError::BufferTooSmall) => unreachable!("to_vec grows its buffer"),
    }
}

//! Raw CBOR trees: every argument keeps its width class and map entries keep
//! their encoded order, so raw bytes and raw trees are in bijection.

use crate::error::{Error, Result};
use crate::header::{encode_header, Header, Major, RawUint};
use crate::view::{ItemRef, View};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RawItem {
    Int {
        negative: bool,
        arg: RawUint,
    },
    /// 0..=23 or 32..=255.
    Simple(u8),
    Bytes {
        len: RawUint,
        payload: Vec<u8>,
    },
    Text {
        len: RawUint,
        payload: Vec<u8>,
    },
    Array {
        count: RawUint,
        items: Vec<RawItem>,
    },
    Map {
        count: RawUint,
        entries: Vec<(RawItem, RawItem)>,
    },
    Tagged {
        tag: RawUint,
        payload: Box<RawItem>,
    },
}

impl RawItem {
    pub fn uint(value: u64) -> RawItem {
        RawItem::Int { negative: false, arg: RawUint::minimal(value) }
    }

    pub fn text(s: &str) -> RawItem {
        RawItem::Text { len: RawUint::minimal(s.len() as u64), payload: s.as_bytes().to_vec() }
    }

    pub fn bytes(b: &[u8]) -> RawItem {
        RawItem::Bytes { len: RawUint::minimal(b.len() as u64), payload: b.to_vec() }
    }

    pub fn array(items: Vec<RawItem>) -> RawItem {
        RawItem::Array { count: RawUint::minimal(items.len() as u64), items }
    }

    pub fn map(entries: Vec<(RawItem, RawItem)>) -> RawItem {
        RawItem::Map { count: RawUint::minimal(entries.len() as u64), entries }
    }

    fn header(&self) -> Result<Header> {
        let h = match self {
            RawItem::Int { negative: false, arg } => Header::new(Major::UInt, *arg),
            RawItem::Int { negative: true, arg } => Header::new(Major::NInt, *arg),
            RawItem::Simple(v) => {
                if (24..32).contains(v) {
                    return Err(Error::InvalidSimple);
                }
                Header::minimal(Major::Simple, *v as u64)
            }
            RawItem::Bytes { len, payload } | RawItem::Text { len, payload } => {
                if len.value() != payload.len() as u64 {
                    return Err(Error::Malformed);
                }
                let major = if matches!(self, RawItem::Bytes { .. }) { Major::Bytes } else { Major::Text };
                if major == Major::Text && std::str::from_utf8(payload).is_err() {
                    return Err(Error::InvalidUtf8);
                }
                Header::new(major, *len)
            }
            RawItem::Array { count, items } => {
                if count.value() != items.len() as u64 {
                    return Err(Error::Malformed);
                }
                Header::new(Major::Array, *count)
            }
            RawItem::Map { count, entries } => {
                if count.value() != entries.len() as u64 {
                    return Err(Error::Malformed);
                }
                Header::new(Major::Map, *count)
            }
            RawItem::Tagged { tag, .. } => Header::new(Major::Tagged, *tag),
        };
        Ok(h)
    }
}

/// Writes the byte representation of `x` into `out`, returning its size.
pub fn serialize_raw(x: &RawItem, out: &mut [u8]) -> Result<usize> {
    let mut pos = encode_header(x.header()?, out)?;
    match x {
        RawItem::Bytes { payload, .. } | RawItem::Text { payload, .. } => {
            let end = pos + payload.len();
            out.get_mut(pos..end).ok_or(Error::BufferTooSmall)?.copy_from_slice(payload);
            pos = end;
        }
        RawItem::Array { items, .. } => {
            for i in items {
                pos += serialize_raw(i, &mut out[pos..])?;
            }
        }
        RawItem::Map { entries, .. } => {
            for (k, v) in entries {
                pos += serialize_raw(k, &mut out[pos..])?;
                pos += serialize_raw(v, &mut out[pos..])?;
            }
        }
        RawItem::Tagged { payload, .. } => pos += serialize_raw(payload, &mut out[pos..])?,
        RawItem::Int { .. } | RawItem::Simple(_) => {}
    }
    Ok(pos)
}

/// Serialized size of `x`, or `TooLarge` as soon as the running total
/// passes `bound`.
pub fn size_raw(x: &RawItem, bound: usize) -> Result<usize> {
    let mut total = 0usize;
    add_size(x, bound, &mut total)?;
    Ok(total)
}

fn add_size(x: &RawItem, bound: usize, total: &mut usize) -> Result<()> {
    let bump = |total: &mut usize, n: usize| -> Result<()> {
        if n > bound - *total {
            return Err(Error::TooLarge);
        }
        *total += n;
        Ok(())
    };
    bump(total, x.header()?.encoded_len())?;
    match x {
        RawItem::Bytes { payload, .. } | RawItem::Text { payload, .. } => bump(total, payload.len())?,
        RawItem::Array { items, .. } => {
            for i in items {
                add_size(i, bound, total)?;
            }
        }
        RawItem::Map { entries, .. } => {
            for (k, v) in entries {
                add_size(k, bound, total)?;
                add_size(v, bound, total)?;
            }
        }
        RawItem::Tagged { payload, .. } => add_size(payload, bound, total)?,
        RawItem::Int { .. } | RawItem::Simple(_) => {}
    }
    Ok(())
}

pub fn to_vec_raw(x: &RawItem) -> Result<Vec<u8>> {
    let n = size_raw(x, usize::MAX)?;
    let mut out = vec![0u8; n];
    serialize_raw(x, &mut out)?;
    Ok(out)
}

/// Validates and fully decodes the raw item at the start of `input`.
///
/// Builds a heap tree recursively; `depth_limit` bounds the recursion.
pub fn parse_raw(input: &[u8], depth_limit: usize) -> Result<(RawItem, usize)> {
    let (r, _) = ItemRef::parse(input)?;
    Ok((raw_from_ref(r, depth_limit)?, r.len()))
}

pub fn raw_from_ref(r: ItemRef<'_>, depth_limit: usize) -> Result<RawItem> {
    Ok(match r.view() {
        View::Int { negative, arg } => RawItem::Int { negative, arg },
        View::Simple(v) => RawItem::Simple(v),
        View::Bytes(b) => RawItem::Bytes { len: string_len(r), payload: b.to_vec() },
        View::Text(b) => RawItem::Text { len: string_len(r), payload: b.to_vec() },
        View::Array(it) => {
            let depth = depth_limit.checked_sub(1).ok_or(Error::DepthExceeded)?;
            let count = string_len(r);
            let items = it.map(|i| raw_from_ref(i, depth)).collect::<Result<_>>()?;
            RawItem::Array { count, items }
        }
        View::Map(it) => {
            let depth = depth_limit.checked_sub(1).ok_or(Error::DepthExceeded)?;
            let count = string_len(r);
            let entries =
                it.map(|(k, v)| Ok((raw_from_ref(k, depth)?, raw_from_ref(v, depth)?))).collect::<Result<_>>()?;
            RawItem::Map { count, entries }
        }
        View::Tagged { tag, payload } => {
            let depth = depth_limit.checked_sub(1).ok_or(Error::DepthExceeded)?;
            RawItem::Tagged { tag, payload: Box::new(raw_from_ref(payload, depth)?) }
        }
    })
}

fn string_len(r: ItemRef<'_>) -> RawUint {
    crate::header::parse_header(r.bytes()).expect("validated").0.arg
}

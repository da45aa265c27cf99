//! Deterministic CBOR: minimal-width arguments and maps whose keys strictly
//! increase in lexicographic byte order of their encodings.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::header::{encode_header, parse_header, Header, Major, RawUint};
use crate::raw::RawItem;
use crate::rec::{jump, validate_raw};
use crate::view::{ItemRef, View};

/// Default nesting bound for heap-building decoders.
pub const DEFAULT_DEPTH_LIMIT: usize = 64;

/// A CBOR item in the canonical data model.
///
/// Integers carry no width and maps are kept sorted by [`compare_det`] on
/// keys without duplicates, so every value has exactly one encoding.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Item {
    UInt(u64),
    /// The integer `-1 - n`.
    NInt(u64),
    Simple(u8),
    Bytes(Vec<u8>),
    Text(String),
    Tagged(u64, Box<Item>),
    Array(Vec<Item>),
    Map(Map),
}

/// Map entries sorted by key, keys pairwise distinct.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Map(Vec<(Item, Item)>);

impl Map {
    pub fn entries(&self) -> &[(Item, Item)] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<(Item, Item)> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, key: &Item) -> Option<&Item> {
        self.0.binary_search_by(|(k, _)| compare_det(k, key)).ok().map(|i| &self.0[i].1)
    }
}

impl Item {
    /// Integer in `[-2^64, 2^64 - 1]`; `None` outside.
    pub fn int(v: i128) -> Option<Item> {
        if v >= 0 {
            u64::try_from(v).ok().map(Item::UInt)
        } else {
            u64::try_from(-1 - v).ok().map(Item::NInt)
        }
    }

    pub fn text(s: &str) -> Item {
        Item::Text(s.to_owned())
    }

    pub fn bytes(b: &[u8]) -> Item {
        Item::Bytes(b.to_vec())
    }

    pub fn as_int(&self) -> Option<i128> {
        match *self {
            Item::UInt(v) => Some(v as i128),
            Item::NInt(n) => Some(-1 - n as i128),
            _ => None,
        }
    }

    pub fn major(&self) -> Major {
        match self {
            Item::UInt(_) => Major::UInt,
            Item::NInt(_) => Major::NInt,
            Item::Bytes(_) => Major::Bytes,
            Item::Text(_) => Major::Text,
            Item::Array(_) => Major::Array,
            Item::Map(_) => Major::Map,
            Item::Tagged(..) => Major::Tagged,
            Item::Simple(_) => Major::Simple,
        }
    }

    fn header(&self) -> Header {
        let arg = match self {
            Item::UInt(v) | Item::NInt(v) | Item::Tagged(v, _) => *v,
            Item::Simple(v) => *v as u64,
            Item::Bytes(b) => b.len() as u64,
            Item::Text(s) => s.len() as u64,
            Item::Array(a) => a.len() as u64,
            Item::Map(m) => m.len() as u64,
        };
        Header::minimal(self.major(), arg)
    }

    /// Decodes a validated item, sorting maps and rejecting duplicates.
    pub fn decode(r: ItemRef<'_>, depth_limit: usize) -> Result<Item> {
        Ok(match r.view() {
            View::Int { negative: false, arg } => Item::UInt(arg.value()),
            View::Int { negative: true, arg } => Item::NInt(arg.value()),
            View::Simple(v) => Item::Simple(v),
            View::Bytes(b) => Item::Bytes(b.to_vec()),
            View::Text(t) => Item::Text(String::from_utf8(t.to_vec()).map_err(|_| Error::InvalidUtf8)?),
            View::Array(it) => {
                let depth = depth_limit.checked_sub(1).ok_or(Error::DepthExceeded)?;
                Item::Array(it.map(|i| Item::decode(i, depth)).collect::<Result<_>>()?)
            }
            View::Map(it) => {
                let depth = depth_limit.checked_sub(1).ok_or(Error::DepthExceeded)?;
                let entries = it
                    .map(|(k, v)| Ok((Item::decode(k, depth)?, Item::decode(v, depth)?)))
                    .collect::<Result<Vec<_>>>()?;
                mk_map(entries)?
            }
            View::Tagged { tag, payload } => {
                let depth = depth_limit.checked_sub(1).ok_or(Error::DepthExceeded)?;
                Item::Tagged(tag.value(), Box::new(Item::decode(payload, depth)?))
            }
        })
    }

    /// The raw tree of this item's deterministic encoding.
    pub fn to_raw(&self) -> RawItem {
        let min = RawUint::minimal;
        match self {
            Item::UInt(v) => RawItem::Int { negative: false, arg: min(*v) },
            Item::NInt(v) => RawItem::Int { negative: true, arg: min(*v) },
            Item::Simple(v) => RawItem::Simple(*v),
            Item::Bytes(b) => RawItem::bytes(b),
            Item::Text(s) => RawItem::text(s),
            Item::Tagged(t, p) => RawItem::Tagged { tag: min(*t), payload: Box::new(p.to_raw()) },
            Item::Array(a) => RawItem::array(a.iter().map(Item::to_raw).collect()),
            Item::Map(m) => RawItem::map(m.0.iter().map(|(k, v)| (k.to_raw(), v.to_raw())).collect()),
        }
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        compare_det(self, other)
    }
}

/// Orders items exactly as their deterministic encodings compare bytewise.
///
/// Distinct major types order by major type. Within a type, the argument
/// decides first (minimal widths make argument order and encoded order
/// agree), then string payloads bytewise, then children left to right.
pub fn compare_det(x: &Item, y: &Item) -> Ordering {
    let (hx, hy) = (x.header(), y.header());
    hx.major.cmp(&hy.major).then(hx.arg.value().cmp(&hy.arg.value())).then_with(|| match (x, y) {
        (Item::Bytes(a), Item::Bytes(b)) => a.cmp(b),
        (Item::Text(a), Item::Text(b)) => a.as_bytes().cmp(b.as_bytes()),
        (Item::Tagged(_, a), Item::Tagged(_, b)) => compare_det(a, b),
        (Item::Array(a), Item::Array(b)) => {
            a.iter().zip(b).map(|(a, b)| compare_det(a, b)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
        }
        (Item::Map(a), Item::Map(b)) => {
            a.0.iter()
                .zip(&b.0)
                .map(|((ka, va), (kb, vb))| compare_det(ka, kb).then_with(|| compare_det(va, vb)))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        }
        _ => Ordering::Equal,
    })
}

/// Builds a map from entries in any order; fails on equal keys.
pub fn mk_map(mut entries: Vec<(Item, Item)>) -> Result<Item> {
    entries.sort_by(|a, b| compare_det(&a.0, &b.0));
    if entries.windows(2).any(|w| compare_det(&w[0].0, &w[1].0).is_eq()) {
        return Err(Error::DuplicateKey);
    }
    Ok(Item::Map(Map(entries)))
}

/// Size of the deterministic encoding of `x`.
pub fn size_det(x: &Item) -> usize {
    let h = x.header().encoded_len();
    h + match x {
        Item::Bytes(b) => b.len(),
        Item::Text(s) => s.len(),
        Item::Tagged(_, p) => size_det(p),
        Item::Array(a) => a.iter().map(size_det).sum(),
        Item::Map(m) => m.0.iter().map(|(k, v)| size_det(k) + size_det(v)).sum(),
        _ => 0,
    }
}

/// Writes the deterministic encoding of `x` into `out`.
pub fn serialize_det(x: &Item, out: &mut [u8]) -> Result<usize> {
    let mut pos = encode_header(x.header(), out)?;
    let mut put = |pos: &mut usize, b: &[u8]| -> Result<()> {
        let end = *pos + b.len();
        out.get_mut(*pos..end).ok_or(Error::BufferTooSmall)?.copy_from_slice(b);
        *pos = end;
        Ok(())
    };
    match x {
        Item::Bytes(b) => put(&mut pos, b)?,
        Item::Text(s) => put(&mut pos, s.as_bytes())?,
        Item::Tagged(_, p) => pos += serialize_det(p, &mut out[pos..])?,
        Item::Array(a) => {
            for i in a {
                pos += serialize_det(i, &mut out[pos..])?;
            }
        }
        Item::Map(m) => {
            for (k, v) in &m.0 {
                pos += serialize_det(k, &mut out[pos..])?;
                pos += serialize_det(v, &mut out[pos..])?;
            }
        }
        _ => {}
    }
    Ok(pos)
}

pub fn encode(x: &Item) -> Vec<u8> {
    let mut out = vec![0u8; size_det(x)];
    let n = serialize_det(x, &mut out).expect("buffer sized by size_det");
    debug_assert_eq!(n, out.len());
    out
}

/// Checks that `input` starts with a deterministically encoded item and
/// returns its size.
///
/// Validation runs first, then one flat pass over the headers checks widths,
/// and each map's keys are compared as byte ranges located with the jumper.
/// No recursion: nested maps are rescanned by each enclosing map's key
/// check, so the worst case is proportional to size times map depth.
pub fn det_check(input: &[u8]) -> Result<usize> {
    let n = validate_raw(input)?;
    let bytes = &input[..n];
    let mut pos = 0;
    while pos < n {
        let (h, hn) = parse_header(&bytes[pos..])?;
        if !h.arg.is_minimal() {
            return Err(Error::NonMinimalInt);
        }
        pos += hn;
        match h.major {
            Major::Bytes | Major::Text => pos += h.arg.value() as usize,
            Major::Map if h.arg.value() >= 2 => check_sorted_keys(&bytes[pos..], h.arg.value())?,
            _ => {}
        }
    }
    Ok(n)
}

fn check_sorted_keys(entries: &[u8], count: u64) -> Result<()> {
    let mut prev: &[u8] = &[];
    let mut pos = 0;
    for i in 0..count {
        let k = jump(&entries[pos..]);
        let key = &entries[pos..pos + k];
        if i > 0 && prev >= key {
            return Err(Error::UnsortedOrDuplicateKeys);
        }
        prev = key;
        pos += k;
        pos += jump(&entries[pos..]);
    }
    Ok(())
}

/// Checks deterministic encoding and returns the item with its size.
pub fn parse_det(input: &[u8]) -> Result<(ItemRef<'_>, usize)> {
    let n = det_check(input)?;
    Ok((ItemRef::trusted(&input[..n]), n))
}

/// Decodes deterministic bytes into an owned item.
pub fn decode(input: &[u8]) -> Result<(Item, usize)> {
    let (r, n) = parse_det(input)?;
    Ok((Item::decode(r, DEFAULT_DEPTH_LIMIT)?, n))
}

/// Minimizes all widths and sorts all maps of a raw tree.
pub fn canonicalize(x: &RawItem, depth_limit: usize) -> Result<Item> {
    let down = || depth_limit.checked_sub(1).ok_or(Error::DepthExceeded);
    Ok(match x {
        RawItem::Int { negative: false, arg } => Item::UInt(arg.value()),
        RawItem::Int { negative: true, arg } => Item::NInt(arg.value()),
        RawItem::Simple(v) => Item::Simple(*v),
        RawItem::Bytes { payload, .. } => Item::Bytes(payload.clone()),
        RawItem::Text { payload, .. } => {
            Item::Text(String::from_utf8(payload.clone()).map_err(|_| Error::InvalidUtf8)?)
        }
        RawItem::Array { items, .. } => {
            let d = down()?;
            Item::Array(items.iter().map(|i| canonicalize(i, d)).collect::<Result<_>>()?)
        }
        RawItem::Map { entries, .. } => {
            let d = down()?;
            let entries = entries
                .iter()
                .map(|(k, v)| Ok((canonicalize(k, d)?, canonicalize(v, d)?)))
                .collect::<Result<Vec<_>>>()?;
            mk_map(entries)?
        }
        RawItem::Tagged { tag, payload } => Item::Tagged(tag.value(), Box::new(canonicalize(payload, down()?)?)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: i128) -> Item {
        Item::int(v).unwrap()
    }

    #[test]
    fn det_check_examples() {
        assert_eq!(det_check(&[0x19, 0x00, 0x0a]), Err(Error::NonMinimalInt));
        assert_eq!(det_check(&[0xa2, 0x01, 0x00, 0x00, 0x00]), Err(Error::UnsortedOrDuplicateKeys));
        assert_eq!(det_check(&[0xa2, 0x00, 0x00, 0x00, 0x00]), Err(Error::UnsortedOrDuplicateKeys));
        assert_eq!(det_check(&[0xa2, 0x00, 0x00, 0x01, 0x00]), Ok(5));
        // nested unsorted map inside an array
        assert_eq!(det_check(&[0x81, 0xa2, 0x01, 0x00, 0x00, 0x00]), Err(Error::UnsortedOrDuplicateKeys));
        // non-minimal string length
        assert_eq!(det_check(&[0x78, 0x01, 0x61]), Err(Error::NonMinimalInt));
    }

    #[test]
    fn comparator_examples() {
        assert_eq!(compare_det(&int(1), &int(2)), Ordering::Less);
        assert_eq!(compare_det(&int(-1), &int(-2)), Ordering::Less);
        assert_eq!(compare_det(&int(1), &Item::text("a")), Ordering::Less);
        assert_eq!(compare_det(&Item::Array(vec![int(0)]), &Item::Array(vec![int(0), int(1)])), Ordering::Less);
    }

    #[test]
    fn mk_map_examples() {
        let m = mk_map(vec![(int(2), Item::text("b")), (int(1), Item::text("a"))]).unwrap();
        let Item::Map(m) = m else { panic!() };
        assert_eq!(m.entries()[0].0, int(1));
        assert_eq!(m.get(&int(2)), Some(&Item::text("b")));
        assert_eq!(mk_map(vec![(int(1), int(0)), (int(1), int(1))]), Err(Error::DuplicateKey));
        assert_eq!(mk_map(vec![]).unwrap(), Item::Map(Map::default()));
    }

    #[test]
    fn serializer_examples() {
        assert_eq!(encode(&int(10)), [0x0a]);
        let m = mk_map(vec![(int(1), int(0)), (int(0), int(0))]).unwrap();
        assert_eq!(encode(&m), [0xa2, 0x00, 0x00, 0x01, 0x00]);
        assert_eq!(encode(&Item::text("")), [0x60]);
        let mut small = [0u8; 2];
        assert_eq!(serialize_det(&m, &mut small), Err(Error::BufferTooSmall));
    }

    #[test]
    fn canonicalize_examples() {
        let wide = RawItem::Int { negative: false, arg: RawUint::new(10, 1).unwrap() };
        assert_eq!(canonicalize(&wide, 4), Ok(int(10)));
        let m = RawItem::map(vec![(RawItem::uint(1), RawItem::uint(0)), (RawItem::uint(0), RawItem::uint(0))]);
        let Item::Map(c) = canonicalize(&m, 4).unwrap() else { panic!() };
        assert_eq!(c.entries().iter().map(|e| e.0.clone()).collect::<Vec<_>>(), vec![int(0), int(1)]);
        let deep = RawItem::array(vec![RawItem::array(vec![])]);
        assert_eq!(canonicalize(&deep, 1), Err(Error::DepthExceeded));
        let dup = RawItem::map(vec![
            (RawItem::uint(0), RawItem::uint(1)),
            (RawItem::Int { negative: false, arg: RawUint::new(0, 1).unwrap() }, RawItem::uint(2)),
        ]);
        assert_eq!(canonicalize(&dup, 4), Err(Error::DuplicateKey));
    }

    #[test]
    fn parse_det_examples() {
        let (r, n) = parse_det(&[0xa1, 0x00, 0x0a]).unwrap();
        assert_eq!(n, 3);
        assert!(matches!(r.view(), View::Map(m) if m.remaining() == 1));
        assert_eq!(parse_det(&[0x19, 0x00, 0x0a]).unwrap_err(), Error::NonMinimalInt);
        assert!(matches!(parse_det(&[0x80]).unwrap().0.view(), View::Array(a) if a.remaining() == 0));
    }

    #[test]
    fn det_check_deep_nesting() {
        let mut bytes = vec![0x81u8; 1_000_000];
        bytes.push(0x00);
        assert_eq!(det_check(&bytes), Ok(1_000_001));
    }

    #[test]
    fn int_bounds() {
        assert_eq!(Item::int(-(1i128 << 64)), Some(Item::NInt(u64::MAX)));
        assert_eq!(Item::int(1i128 << 64), None);
        assert_eq!(Item::int(-(1i128 << 64) - 1), None);
    }
}

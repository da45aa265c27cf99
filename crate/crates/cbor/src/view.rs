//! Zero-copy shallow reading of validated bytes.
//!
//! An [`ItemRef`] is a slice holding exactly one valid item. Reading it
//! decodes only the header: string payloads and children stay in the input,
//! and containers are exposed as iterators that locate each child with the
//! jumper when advanced.

use crate::error::Result;
use crate::header::{read_header_trusted, Major, RawUint};
use crate::rec::{jump, validate_raw};

/// Exactly one valid raw CBOR item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ItemRef<'a> {
    bytes: &'a [u8],
}

impl<'a> ItemRef<'a> {
    /// Validates the item at the start of `input`; returns it and the rest.
    pub fn parse(input: &'a [u8]) -> Result<(ItemRef<'a>, &'a [u8])> {
        let n = validate_raw(input)?;
        Ok((ItemRef { bytes: &input[..n] }, &input[n..]))
    }

    /// `bytes` must hold exactly one valid item.
    pub(crate) fn trusted(bytes: &'a [u8]) -> ItemRef<'a> {
        ItemRef { bytes }
    }

    pub fn bytes(&self) -> &'a [u8] {
        self.bytes
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn major(&self) -> Major {
        Major::from_bits(self.bytes[0] >> 5)
    }

    /// Head constructor and scalar fields; O(header) work, no copies.
    pub fn view(&self) -> View<'a> {
        read_shallow(self.bytes)
    }
}

/// Shallow view of an item.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View<'a> {
    Int {
        negative: bool,
        arg: RawUint,
    },
    Simple(u8),
    Bytes(&'a [u8]),
    /// UTF-8 already checked by validation.
    Text(&'a [u8]),
    Array(ArrayIter<'a>),
    Map(MapIter<'a>),
    Tagged {
        tag: RawUint,
        payload: ItemRef<'a>,
    },
}

/// Reads the head of the single valid item held in `item`.
pub fn read_shallow(item: &[u8]) -> View<'_> {
    let (major, value, n) = read_header_trusted(item);
    let size = match n {
        1 => 0,
        2 => 1,
        3 => 2,
        5 => 3,
        _ => 4,
    };
    let arg = RawUint::new(value, size).expect("validated header");
    let rest = &item[n..];
    match major {
        Major::UInt => View::Int { negative: false, arg },
        Major::NInt => View::Int { negative: true, arg },
        Major::Bytes => View::Bytes(&rest[..value as usize]),
        Major::Text => View::Text(&rest[..value as usize]),
        Major::Array => View::Array(ArrayIter { bytes: rest, remaining: value }),
        Major::Map => View::Map(MapIter { bytes: rest, remaining: value }),
        Major::Tagged => View::Tagged { tag: arg, payload: ItemRef::trusted(rest) },
        Major::Simple => View::Simple(value as u8),
    }
}

/// Iterator over the elements of an array view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayIter<'a> {
    bytes: &'a [u8],
    remaining: u64,
}

impl<'a> ArrayIter<'a> {
    pub fn remaining(&self) -> u64 {
        self.remaining
    }

    /// Bytes of the elements not yet yielded (and possibly trailing input).
    pub fn rest(&self) -> &'a [u8] {
        self.bytes
    }

    /// An iterator over the first `count` remaining elements only.
    pub fn take_prefix(&self, count: u64) -> ArrayIter<'a> {
        ArrayIter { bytes: self.bytes, remaining: count.min(self.remaining) }
    }
}

impl<'a> Iterator for ArrayIter<'a> {
    type Item = ItemRef<'a>;

    fn next(&mut self) -> Option<ItemRef<'a>> {
        if self.remaining == 0 {
            return None;
        }
        let n = jump(self.bytes);
        let (item, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        self.remaining -= 1;
        Some(ItemRef::trusted(item))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, Some(n))
    }
}

/// Iterator over the entries of a map view, in encoded order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapIter<'a> {
    bytes: &'a [u8],
    remaining: u64,
}

impl<'a> MapIter<'a> {
    pub fn remaining(&self) -> u64 {
        self.remaining
    }

    pub fn rest(&self) -> &'a [u8] {
        self.bytes
    }

    /// Value of the entry whose key is encoded as `key`. Keys must come in
    /// increasing byte order, as in a deterministically encoded map: the
    /// scan stops at the first larger key.
    pub fn find_sorted(self, key: &[u8]) -> Option<ItemRef<'a>> {
        for (k, v) in self {
            match k.bytes().cmp(key) {
                std::cmp::Ordering::Less => {}
                std::cmp::Ordering::Equal => return Some(v),
                std::cmp::Ordering::Greater => return None,
            }
        }
        None
    }
}

impl<'a> Iterator for MapIter<'a> {
    type Item = (ItemRef<'a>, ItemRef<'a>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        let k = jump(self.bytes);
        let (key, rest) = self.bytes.split_at(k);
        let v = jump(rest);
        let (value, rest) = rest.split_at(v);
        self.bytes = rest;
        self.remaining -= 1;
        Some((ItemRef::trusted(key), ItemRef::trusted(value)))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, Some(n))
    }
}

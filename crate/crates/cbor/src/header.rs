//! Item headers: the major type in the top three bits of the first byte,
//! the additional information in the low five bits, and up to eight
//! big-endian argument bytes.

use crate::error::{Error, Result};

/// The eight CBOR major types, in encoding order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Major {
    UInt = 0,
    NInt = 1,
    Bytes = 2,
    Text = 3,
    Array = 4,
    Map = 5,
    Tagged = 6,
    Simple = 7,
}

impl Major {
    pub fn from_bits(bits: u8) -> Major {
        match bits & 7 {
            0 => Major::UInt,
            1 => Major::NInt,
            2 => Major::Bytes,
            3 => Major::Text,
            4 => Major::Array,
            5 => Major::Map,
            6 => Major::Tagged,
            _ => Major::Simple,
        }
    }

    pub fn bits(self) -> u8 {
        self as u8
    }
}

/// A 64-bit argument together with the width class it is encoded in.
///
/// Class 0 stores the value in the additional-information bits (value <= 23);
/// classes 1..=4 use 1, 2, 4 or 8 trailing bytes. A value may sit in a
/// wider class than necessary; only the deterministic layer forbids that.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RawUint {
    value: u64,
    size: u8,
}

impl RawUint {
    /// Returns `None` when `value` does not fit the width class `size`.
    pub fn new(value: u64, size: u8) -> Option<RawUint> {
        let fits = match size {
            0 => value <= 23,
            1 => value <= 0xff,
            2 => value <= 0xffff,
            3 => value <= 0xffff_ffff,
            4 => true,
            _ => false,
        };
        fits.then_some(RawUint { value, size })
    }

    /// The shortest width class that holds `value`.
    pub fn minimal(value: u64) -> RawUint {
        let size = match value {
            0..=23 => 0,
            24..=0xff => 1,
            0x100..=0xffff => 2,
            0x1_0000..=0xffff_ffff => 3,
            _ => 4,
        };
        RawUint { value, size }
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn size(self) -> u8 {
        self.size
    }

    pub fn is_minimal(self) -> bool {
        self.size == RawUint::minimal(self.value).size
    }

    /// Number of argument bytes following the initial byte.
    pub fn trailing_len(self) -> usize {
        trailing_width(self.size)
    }
}

pub(crate) fn trailing_width(size: u8) -> usize {
    match size {
        0 => 0,
        1 => 1,
        2 => 2,
        3 => 4,
        _ => 8,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Header {
    pub major: Major,
    pub arg: RawUint,
}

impl Header {
    pub fn new(major: Major, arg: RawUint) -> Header {
        Header { major, arg }
    }

    /// Header with the argument in its shortest form.
    pub fn minimal(major: Major, value: u64) -> Header {
        Header { major, arg: RawUint::minimal(value) }
    }

    pub fn encoded_len(&self) -> usize {
        1 + self.arg.trailing_len()
    }
}

/// Writes `h` to the front of `out` and returns the number of bytes written.
pub fn encode_header(h: Header, out: &mut [u8]) -> Result<usize> {
    let n = h.encoded_len();
    if out.len() < n {
        return Err(Error::BufferTooSmall);
    }
    let info = match h.arg.size {
        0 => h.arg.value as u8,
        s => 23 + s,
    };
    out[0] = (h.major.bits() << 5) | info;
    let be = h.arg.value.to_be_bytes();
    out[1..n].copy_from_slice(&be[8 - (n - 1)..]);
    Ok(n)
}

/// Parses the header at the start of `input`, returning it with its length.
///
/// String payloads are not part of the returned length.
pub fn parse_header(input: &[u8]) -> Result<(Header, usize)> {
    let first = *input.first().ok_or(Error::Truncated)?;
    let major = Major::from_bits(first >> 5);
    let info = first & 0x1f;
    let size = match info {
        0..=23 => 0,
        24 => 1,
        25 => 2,
        26 => 3,
        27 => 4,
        28..=30 => return Err(Error::ReservedInfo),
        _ => return Err(Error::IndefiniteLength),
    };
    if major == Major::Simple && size > 1 {
        // Half, single and double precision floats.
        return Err(Error::ReservedInfo);
    }
    let width = trailing_width(size);
    if input.len() < 1 + width {
        return Err(Error::Truncated);
    }
    let value =
        if size == 0 { info as u64 } else { input[1..=width].iter().fold(0u64, |acc, b| (acc << 8) | *b as u64) };
    if major == Major::Simple && size == 1 && value < 32 {
        return Err(Error::InvalidSimple);
    }
    Ok((Header { major, arg: RawUint { value, size } }, 1 + width))
}

/// Number of child items that follow a header: `n` for arrays, `2n` for
/// maps, one for tags and zero otherwise. Saturates instead of wrapping.
pub fn count_payload(h: Header) -> u64 {
    match h.major {
        Major::Array => h.arg.value,
        Major::Map => h.arg.value.saturating_mul(2),
        Major::Tagged => 1,
        _ => 0,
    }
}

/// Header reader for bytes already known to be valid.
#[inline]
pub(crate) fn read_header_trusted(input: &[u8]) -> (Major, u64, usize) {
    let first = input[0];
    let major = Major::from_bits(first >> 5);
    let info = first & 0x1f;
    if info < 24 {
        return (major, info as u64, 1);
    }
    let width = 1usize << (info - 24);
    let value = input[1..=width].iter().fold(0u64, |acc, b| (acc << 8) | *b as u64);
    (major, value, 1 + width)
}

//! Constant-stack validation of recursive formats.
//!
//! A format qualifies when every item is a header followed immediately by a
//! number of child items that the header alone determines. Validation then
//! reduces to one loop over a counter of items still expected: no recursion,
//! no allocation, and every subtraction guarded against the bytes left.

use crate::error::{Error, Result};
use crate::header::{count_payload, parse_header, Major};

/// Failures produced by the validation loop itself, independent of the format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructuralError {
    /// More items are expected than there are bytes left.
    Truncated,
    /// A header declares more children than there are bytes left.
    CountOverflow,
}

/// Descriptor of a recursive format.
pub trait RecursiveFormat {
    type Error: From<StructuralError>;

    /// Validates one header at the start of `input`, returning its byte length
    /// (at least 1). Header validity must be stable under appending bytes.
    fn validate_header(&self, input: &[u8]) -> std::result::Result<usize, Self::Error>;

    /// Number of child items following the (already validated) `header`.
    fn payload_count(&self, header: &[u8]) -> u64;
}

/// Returns the exact size of the single valid item at the start of `input`.
///
/// Trailing bytes are ignored. Uses a fixed number of machine words whatever
/// the input length or nesting depth.
pub fn validate_recursive<F: RecursiveFormat>(format: &F, input: &[u8]) -> std::result::Result<usize, F::Error> {
    let len = input.len();
    let mut expected: usize = 1;
    let mut pos: usize = 0;
    while expected > 0 {
        expected -= 1;
        let header_size = format.validate_header(&input[pos..])?;
        if header_size == 0 {
            return Err(StructuralError::Truncated.into());
        }
        let header = &input[pos..pos + header_size];
        pos += header_size;
        // each remaining item consumes at least one byte
        if expected > len - pos {
            return Err(StructuralError::Truncated.into());
        }
        let count = format.payload_count(header);
        if count > (len - pos - expected) as u64 {
            return Err(StructuralError::CountOverflow.into());
        }
        expected += count as usize;
    }
    Ok(pos)
}

/// Raw CBOR as a recursive format.
///
/// String payloads belong to the header, so text is UTF-8 checked here.
#[derive(Debug, Clone, Copy, Default)]
pub struct CborFormat;

impl RecursiveFormat for CborFormat {
    type Error = Error;

    fn validate_header(&self, input: &[u8]) -> Result<usize> {
        let (h, n) = parse_header(input)?;
        match h.major {
            Major::Bytes | Major::Text => {
                let avail = (input.len() - n) as u64;
                if h.arg.value() > avail {
                    return Err(Error::Truncated);
                }
                let end = n + h.arg.value() as usize;
                if h.major == Major::Text && std::str::from_utf8(&input[n..end]).is_err() {
                    return Err(Error::InvalidUtf8);
                }
                Ok(end)
            }
            _ => Ok(n),
        }
    }

    fn payload_count(&self, header: &[u8]) -> u64 {
        match parse_header(header) {
            Ok((h, _)) => count_payload(h),
            Err(_) => 0,
        }
    }
}

/// Validates one raw CBOR item at the start of `input` and returns its size.
pub fn validate_raw(input: &[u8]) -> Result<usize> {
    validate_recursive(&CborFormat, input)
}

/// Size of the valid raw item at the start of `input`, without re-checking.
///
/// `input` must start with a valid raw item; otherwise this may panic.
pub fn jump(input: &[u8]) -> usize {
    let mut expected: u64 = 1;
    let mut pos = 0usize;
    while expected > 0 {
        expected -= 1;
        let (major, arg, n) = crate::header::read_header_trusted(&input[pos..]);
        pos += n;
        match major {
            Major::Bytes | Major::Text => pos += arg as usize,
            Major::Array => expected += arg,
            Major::Map => expected += 2 * arg,
            Major::Tagged => expected += 1,
            _ => {}
        }
    }
    pos
}

//! Definite-length CBOR with a deterministic-encoding layer.
//!
//! Bytes are validated by a single loop whose memory use does not depend on
//! the input. Validated bytes can then be read shallowly through [`ItemRef`]
//! views, checked for deterministic encoding with [`det_check`], or decoded
//! into the owned canonical model [`Item`].

pub mod det;
pub mod diag;
pub mod error;
pub mod header;
pub mod oracle;
pub mod raw;
pub mod rec;
pub mod view;

pub use det::{
    canonicalize, compare_det, decode, det_check, encode, mk_map, parse_det, serialize_det, size_det, Item, Map,
    DEFAULT_DEPTH_LIMIT,
};
pub use error::{Error, Result};
pub use header::{count_payload, encode_header, parse_header, Header, Major, RawUint};
pub use raw::{parse_raw, serialize_raw, size_raw, to_vec_raw, RawItem};
pub use rec::{jump, validate_raw, validate_recursive, RecursiveFormat, StructuralError};
pub use view::{read_shallow, ArrayIter, ItemRef, MapIter, View};

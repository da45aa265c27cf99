//! CDDL schemas over deterministic CBOR: parsing, semantics, elaboration to
//! shapes, and validation, parsing and serialization of typed values.

pub mod ast;
pub mod elab;
pub mod parse;
pub mod runtime;
pub mod sem;
pub mod typeops;

pub use ast::{ArrayGroup, Atom, MapGroup, Schema, StrKind, TypeExpr};
pub use parse::{inline, parse_cddl, ParseError, ParseErrorKind};

//! Embedded CDDL for the supported COSE structures.
//!
//! Compared with the RFC 9052 text, header entries use cuts, a header map
//! may not hold both an IV (5) and a partial IV (6), and `Sig_structure`
//! picks its shape from the context string so that a greedy `?` cannot eat
//! the external AAD. `+` and `.cbor` are not supported by the parser and
//! are written out or dropped.

use std::sync::OnceLock;

use canon_cddl::elab::{elaborate_schema, ElabSchema};
use canon_cddl::parse_cddl;

pub const COMMON: &str = r#"
label = int / tstr
values = any
header_map = { Generic_Headers, * label => values }
Generic_Headers = (
  ? 1 : int / tstr,             ; algorithm
  ? 2 : [label, * label],       ; critical headers
  ? 3 : tstr / int,             ; content type
  ? 4 : bstr,                   ; key id
  ? ((5 : bstr, ? 6 : never) // (6 : bstr)),
)
"#;

/// Generic_Headers as published, where 5 and 6 may appear together.
pub const GENERIC_HEADERS_RFC: &str = r#"
header_map = { Generic_Headers, * label => values }
Generic_Headers = (
  ? 1 => int / tstr,
  ? 2 => [label, * label],
  ? 3 => tstr / int,
  ? 4 => bstr,
  ? ( 5 => bstr // 6 => bstr )
)
label = int / tstr
values = any
"#;

pub const SIGN1: &str = r#"
COSE_Sign1_Tagged = #6.18(COSE_Sign1)
COSE_Sign1 = [
  bstr,           ; protected: empty or a serialized header_map
  header_map,     ; unprotected
  bstr / nil,     ; payload
  bstr,           ; signature
]
"#;

pub const SIG_STRUCTURE: &str = r#"
Sig_structure = [
  ("Signature" / "CounterSignature", bstr, bstr, bstr, bstr) //
  ("Signature1", bstr, bstr, bstr)
]
"#;

pub const KEY_OKP: &str = r#"
COSE_Key_OKP = { 1:1, -1:int/tstr, ?-2:bstr, ?-4:bstr, *label=>values }
label = int / tstr
values = any
"#;

fn build(text: &str) -> ElabSchema {
    let schema = parse_cddl(text).unwrap_or_else(|e| panic!("embedded schema: {e}"));
    elaborate_schema(&schema).unwrap_or_else(|e| panic!("embedded schema: {e}"))
}

pub fn sign1_tagged() -> &'static ElabSchema {
    static S: OnceLock<ElabSchema> = OnceLock::new();
    S.get_or_init(|| build(&format!("{SIGN1}{COMMON}")))
}

pub fn header_map() -> &'static ElabSchema {
    static S: OnceLock<ElabSchema> = OnceLock::new();
    S.get_or_init(|| build(&format!("root = header_map\n{COMMON}")))
}

pub fn sig_structure() -> &'static ElabSchema {
    static S: OnceLock<ElabSchema> = OnceLock::new();
    S.get_or_init(|| build(SIG_STRUCTURE))
}

pub fn key_okp() -> &'static ElabSchema {
    static S: OnceLock<ElabSchema> = OnceLock::new();
    S.get_or_init(|| build(KEY_OKP))
}

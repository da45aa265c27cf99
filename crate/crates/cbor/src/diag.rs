//! Diagnostic notation for valid items.
//!
//! Arguments stored wider than necessary get an encoding indicator
//! (`_0` for one trailing byte up to `_3` for eight), so the text pins down
//! the exact bytes.

use std::fmt::Write;

use crate::header::{parse_header, Major, RawUint};
use crate::view::ItemRef;

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Array,
    Map,
    Tag,
}

struct Frame {
    kind: Kind,
    total: u64,
    done: u64,
}

impl Kind {
    fn close(self) -> char {
        match self {
            Kind::Array => ']',
            Kind::Map => '}',
            Kind::Tag => ')',
        }
    }
}

fn indicator(arg: RawUint) -> String {
    if arg.is_minimal() {
        String::new()
    } else {
        format!("_{}", arg.size() - 1)
    }
}

fn push_text(out: &mut String, t: &str) {
    out.push('"');
    for c in t.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 || c == '\u{7f}' => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Renders one valid item.
///
/// Walks headers in preorder with a stack of open containers; each byte is
/// visited once whatever the nesting.
pub fn to_diag(item: ItemRef<'_>) -> String {
    let bytes = item.bytes();
    let mut out = String::new();
    let mut stack: Vec<Frame> = Vec::new();
    let mut pos = 0;
    loop {
        if let Some(top) = stack.last_mut() {
            match top.kind {
                Kind::Array if top.done > 0 => out.push_str(", "),
                Kind::Map if top.done % 2 == 1 => out.push_str(": "),
                Kind::Map if top.done > 0 => out.push_str(", "),
                _ => {}
            }
            top.done += 1;
        }
        let (h, n) = parse_header(&bytes[pos..]).expect("valid item");
        let body = &bytes[pos + n..];
        pos += n;
        let arg = h.arg;
        let mut open = None;
        match h.major {
            Major::UInt => {
                let _ = write!(out, "{}{}", arg.value(), indicator(arg));
            }
            Major::NInt => {
                let _ = write!(out, "{}{}", -1 - arg.value() as i128, indicator(arg));
            }
            Major::Simple => match arg.value() {
                20 => out.push_str("false"),
                21 => out.push_str("true"),
                22 => out.push_str("null"),
                23 => out.push_str("undefined"),
                v => {
                    let _ = write!(out, "simple({v})");
                }
            },
            Major::Bytes => {
                out.push_str("h'");
                for byte in &body[..arg.value() as usize] {
                    let _ = write!(out, "{byte:02x}");
                }
                out.push('\'');
                out.push_str(&indicator(arg));
                pos += arg.value() as usize;
            }
            Major::Text => {
                let t = &body[..arg.value() as usize];
                push_text(&mut out, std::str::from_utf8(t).expect("validated UTF-8"));
                out.push_str(&indicator(arg));
                pos += arg.value() as usize;
            }
            Major::Array | Major::Map => {
                let (kind, total) = match h.major {
                    Major::Array => (Kind::Array, arg.value()),
                    _ => (Kind::Map, 2 * arg.value()),
                };
                out.push(if kind == Kind::Array { '[' } else { '{' });
                let ind = indicator(arg);
                if !ind.is_empty() {
                    out.push_str(&ind);
                    out.push(' ');
                }
                open = Some(Frame { kind, total, done: 0 });
            }
            Major::Tagged => {
                let _ = write!(out, "{}{}(", arg.value(), indicator(arg));
                open = Some(Frame { kind: Kind::Tag, total: 1, done: 0 });
            }
        }
        if let Some(f) = open {
            stack.push(f);
        }
        while let Some(top) = stack.last() {
            if top.done < top.total {
                break;
            }
            out.push(top.kind.close());
            stack.pop();
        }
        if stack.is_empty() {
            return out;
        }
    }
}

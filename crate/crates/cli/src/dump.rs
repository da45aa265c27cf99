//! Text form of parsed values.
//!
//! One node per line, children indented two spaces deeper than their
//! parent:
//!
//! ```text
//! pair
//!   text "ACME Corp."
//!   pair
//!     left
//!       unit
//!     table
//!       entry
//!         text "J.D."
//!         uint 1842
//! ```
//!
//! Leaves are `unit`, `none`, `uint N`, `nint N` (N is the negative value
//! itself), `text "..."` (JSON string syntax), `bytes h'..'` and
//! `any h'..'` (the deterministic encoding of an unconstrained item).
//! `left`, `right` and `some` take one child, `pair` two, `list` any number
//! and `table` any number of `entry` nodes holding a key and a value.

use std::fmt::Write;

use canon_cbor::{decode, encode};
use canon_cddl::runtime::{AnyItem, List, Table, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct DumpError {
    pub line: usize,
    pub message: String,
}

fn any_bytes(a: &AnyItem<'_>) -> Vec<u8> {
    match a {
        AnyItem::Ref(r) => r.bytes().to_vec(),
        AnyItem::Owned(x) => encode(x),
    }
}

pub fn write_value(v: &Value<'_>, out: &mut String) {
    write_node(v, 0, out);
}

pub fn to_text(v: &Value<'_>) -> String {
    let mut out = String::new();
    write_value(v, &mut out);
    out
}

fn write_node(v: &Value<'_>, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    let _ = match v {
        Value::Unit => writeln!(out, "{pad}unit"),
        Value::None => writeln!(out, "{pad}none"),
        Value::UInt(n) => writeln!(out, "{pad}uint {n}"),
        Value::NInt(n) => writeln!(out, "{pad}nint {}", -1 - *n as i128),
        Value::Text(s) => writeln!(out, "{pad}text {}", serde_json::to_string(s).expect("string")),
        Value::Bytes(b) => writeln!(out, "{pad}bytes h'{}'", hex::encode(b)),
        Value::Any(a) => writeln!(out, "{pad}any h'{}'", hex::encode(any_bytes(a))),
        Value::Left(x) | Value::Right(x) | Value::Some(x) => {
            let name = match v {
                Value::Left(_) => "left",
                Value::Right(_) => "right",
                _ => "some",
            };
            let _ = writeln!(out, "{pad}{name}");
            write_node(x, depth + 1, out);
            Ok(())
        }
        Value::Pair(a, b) => {
            let _ = writeln!(out, "{pad}pair");
            write_node(a, depth + 1, out);
            write_node(b, depth + 1, out);
            Ok(())
        }
        Value::List(l) => {
            let _ = writeln!(out, "{pad}list");
            for x in l.iter() {
                write_node(&x, depth + 1, out);
            }
            Ok(())
        }
        Value::Table(t) => {
            let _ = writeln!(out, "{pad}table");
            for (k, x) in t.iter() {
                let _ = writeln!(out, "{pad}  entry");
                write_node(&k, depth + 2, out);
                write_node(&x, depth + 2, out);
            }
            Ok(())
        }
    };
}

struct Line<'t> {
    no: usize,
    depth: usize,
    head: &'t str,
    arg: &'t str,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, DumpError> {
    Err(DumpError { line, message: message.into() })
}

fn unhex(line: usize, arg: &str) -> Result<Vec<u8>, DumpError> {
    let Some(body) = arg.strip_prefix("h'").and_then(|a| a.strip_suffix('\'')) else {
        return err(line, "expected h'..'");
    };
    hex::decode(body).or_else(|e| err(line, format!("bad hex: {e}")))
}

fn lines(text: &str) -> Result<Vec<Line<'_>>, DumpError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let indent = raw.len() - raw.trim_start_matches(' ').len();
        if indent % 2 != 0 {
            return err(i + 1, "indentation must be a multiple of two spaces");
        }
        let body = raw.trim();
        let (head, arg) = body.split_once(' ').unwrap_or((body, ""));
        out.push(Line { no: i + 1, depth: indent / 2, head, arg: arg.trim() });
    }
    Ok(out)
}

struct Reader<'t> {
    lines: Vec<Line<'t>>,
    pos: usize,
}

impl Reader<'_> {
    fn children(&mut self, depth: usize) -> Result<Vec<Value<'static>>, DumpError> {
        let mut out = Vec::new();
        while self.pos < self.lines.len() && self.lines[self.pos].depth > depth {
            if self.lines[self.pos].depth != depth + 1 {
                return err(self.lines[self.pos].no, "unexpected indentation");
            }
            out.push(self.node()?);
        }
        Ok(out)
    }

    fn exactly<const N: usize>(&mut self, no: usize, depth: usize) -> Result<[Value<'static>; N], DumpError> {
        let kids = self.children(depth)?;
        let n = kids.len();
        kids.try_into().or_else(|_| err(no, format!("expected {N} children, found {n}")))
    }

    fn node(&mut self) -> Result<Value<'static>, DumpError> {
        let line = &self.lines[self.pos];
        let (no, depth, head, arg) = (line.no, line.depth, line.head, line.arg);
        self.pos += 1;
        let v = match head {
            "unit" => Value::Unit,
            "none" => Value::None,
            "uint" => Value::UInt(arg.parse().or_else(|_| err(no, "bad unsigned integer"))?),
            "nint" => {
                let n: i128 = arg.parse().or_else(|_| err(no, "bad negative integer"))?;
                if !(-(1i128 << 64)..0).contains(&n) {
                    return err(no, "negative integer out of range");
                }
                Value::NInt((-1 - n) as u64)
            }
            "text" => {
                Value::text(&serde_json::from_str::<String>(arg).or_else(|e| err(no, format!("bad string: {e}")))?)
            }
            "bytes" => Value::bytes(&unhex(no, arg)?),
            "any" => {
                let bytes = unhex(no, arg)?;
                let (x, n) = decode(&bytes).or_else(|e| err(no, format!("bad item: {e}")))?;
                if n != bytes.len() {
                    return err(no, "bytes after item");
                }
                Value::Any(AnyItem::Owned(x))
            }
            "left" | "right" | "some" => {
                let [x] = self.exactly(no, depth)?;
                match head {
                    "left" => Value::left(x),
                    "right" => Value::right(x),
                    _ => Value::some(x),
                }
            }
            "pair" => {
                let [a, b] = self.exactly(no, depth)?;
                Value::pair(a, b)
            }
            "list" => Value::List(List::Owned(self.children(depth)?)),
            "table" => {
                let mut entries = Vec::new();
                while self.pos < self.lines.len() && self.lines[self.pos].depth > depth {
                    let e = &self.lines[self.pos];
                    if e.head != "entry" || e.depth != depth + 1 {
                        return err(e.no, "expected entry");
                    }
                    let (eno, edepth) = (e.no, e.depth);
                    self.pos += 1;
                    let [k, x] = self.exactly(eno, edepth)?;
                    entries.push((k, x));
                }
                Value::Table(Table::Owned(entries))
            }
            other => return err(no, format!("unknown node `{other}`")),
        };
        if !matches!(head, "uint" | "nint" | "text" | "bytes" | "any") && !arg.is_empty() {
            return err(no, "unexpected argument");
        }
        Ok(v)
    }
}

pub fn read_value(text: &str) -> Result<Value<'static>, DumpError> {
    let lines = lines(text)?;
    if lines.is_empty() {
        return err(1, "empty input");
    }
    if lines[0].depth != 0 {
        return err(lines[0].no, "first node must not be indented");
    }
    let mut r = Reader { lines, pos: 0 };
    let v = r.node()?;
    if let Some(l) = r.lines.get(r.pos) {
        return err(l.no, "more than one root node");
    }
    Ok(v)
}

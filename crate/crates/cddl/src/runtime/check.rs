//! Validation of deterministic CBOR against an elaborated type.
//!
//! Arrays advance a copyable iterator and restore it when a choice fails.
//! Maps only track how many entries are still unconsumed: elaboration
//! guarantees that concatenated groups never compete for an entry.

use std::cmp::Ordering;

use canon_cbor::diag::to_diag;
use canon_cbor::{encode_header, ArrayIter, Header, ItemRef, Major, MapIter, View};
use thiserror::Error;

use crate::ast::{ArrayGroup, MapGroup, StrKind, TypeExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValidationErrorKind {
    Cbor(canon_cbor::Error),
    SchemaMismatch,
    CutViolation,
    UnconsumedEntries,
}

impl ValidationErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            ValidationErrorKind::Cbor(e) => e.code(),
            ValidationErrorKind::SchemaMismatch => "SchemaMismatch",
            ValidationErrorKind::CutViolation => "CutViolation",
            ValidationErrorKind::UnconsumedEntries => "UnconsumedEntries",
        }
    }
}

/// `path` starts at `$`; `[i]` is an array index, `{k}` a map key in
/// diagnostic notation and `#n` a tag payload.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}: at {path}", kind.code())]
pub struct ValidationError {
    pub kind: ValidationErrorKind,
    pub path: String,
}

impl From<canon_cbor::Error> for ValidationError {
    fn from(e: canon_cbor::Error) -> Self {
        ValidationError { kind: ValidationErrorKind::Cbor(e), path: "$".into() }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Seg<'a> {
    Index(u64),
    Key(ItemRef<'a>),
    Tag(u64),
}

/// Internal failure; the path is collected innermost first while unwinding.
#[derive(Debug)]
pub(crate) struct Fail<'a> {
    kind: ValidationErrorKind,
    path: Vec<Seg<'a>>,
}

impl<'a> Fail<'a> {
    fn new(kind: ValidationErrorKind) -> Fail<'a> {
        Fail { kind, path: Vec::new() }
    }

    fn at(mut self, seg: Seg<'a>) -> Fail<'a> {
        self.path.push(seg);
        self
    }

    pub(crate) fn into_error(self) -> ValidationError {
        let mut path = String::from("$");
        for seg in self.path.iter().rev() {
            match seg {
                Seg::Index(i) => path.push_str(&format!("[{i}]")),
                Seg::Key(k) => path.push_str(&format!("{{{}}}", to_diag(*k))),
                Seg::Tag(n) => path.push_str(&format!("#{n}")),
            }
        }
        ValidationError { kind: self.kind, path }
    }
}

pub(crate) type Check<'a> = Result<(), Fail<'a>>;

fn mismatch<'a>() -> Check<'a> {
    Err(Fail::new(ValidationErrorKind::SchemaMismatch))
}

fn int_value(negative: bool, n: u64) -> i128 {
    if negative {
        -1 - n as i128
    } else {
        n as i128
    }
}

pub(crate) fn matches(t: &TypeExpr, x: ItemRef<'_>) -> bool {
    check_type(t, x).is_ok()
}

pub(crate) fn check_type<'a>(t: &TypeExpr, x: ItemRef<'a>) -> Check<'a> {
    let v = x.view();
    let ok = match (t, v) {
        (TypeExpr::Any, _) => true,
        (TypeExpr::Int, View::Int { .. }) => true,
        (TypeExpr::UInt, View::Int { negative, .. }) => !negative,
        (TypeExpr::NInt, View::Int { negative, .. }) => negative,
        (TypeExpr::LitInt(n), View::Int { negative, arg }) => int_value(negative, arg.value()) == *n,
        (TypeExpr::Range(lo, hi), View::Int { negative, arg }) => {
            (*lo..=*hi).contains(&int_value(negative, arg.value()))
        }
        (TypeExpr::Tstr, View::Text(_)) | (TypeExpr::Bstr, View::Bytes(_)) => true,
        (TypeExpr::LitText(s), View::Text(b)) => s.as_bytes() == b,
        (TypeExpr::Sized { kind: StrKind::Text, lo, hi }, View::Text(b))
        | (TypeExpr::Sized { kind: StrKind::Bytes, lo, hi }, View::Bytes(b)) => (*lo..=*hi).contains(&(b.len() as u64)),
        (TypeExpr::LitSimple(s), View::Simple(v)) => *s == v,
        (TypeExpr::Choice(a, b), _) => return check_type(a, x).or_else(|_| check_type(b, x)),
        (TypeExpr::Tagged(tag, t), View::Tagged { tag: n, payload }) => {
            if n.value() != *tag {
                return mismatch();
            }
            return check_type(t, payload).map_err(|f| f.at(Seg::Tag(*tag)));
        }
        (TypeExpr::Array(g), View::Array(it)) => {
            let total = it.remaining();
            let mut it = it;
            check_array_group(g, &mut it, total)?;
            if it.remaining() != 0 {
                return Err(Fail::new(ValidationErrorKind::SchemaMismatch).at(Seg::Index(total - it.remaining())));
            }
            true
        }
        (TypeExpr::Map(g), View::Map(it)) => {
            let mut rem = it.remaining();
            match check_map_group(g, it, &mut rem) {
                Ok(()) if rem == 0 => true,
                Ok(()) => return Err(Fail::new(ValidationErrorKind::UnconsumedEntries)),
                Err(f) => return Err(f),
            }
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        mismatch()
    }
}

pub(crate) fn check_array_group<'a>(g: &ArrayGroup, it: &mut ArrayIter<'a>, total: u64) -> Check<'a> {
    match g {
        ArrayGroup::Empty => Ok(()),
        ArrayGroup::Elem(t) => {
            let index = total - it.remaining();
            let Some(x) = it.next() else {
                return Err(Fail::new(ValidationErrorKind::SchemaMismatch).at(Seg::Index(index)));
            };
            check_type(t, x).map_err(|f| f.at(Seg::Index(index)))
        }
        ArrayGroup::Concat(a, b) => {
            check_array_group(a, it, total)?;
            check_array_group(b, it, total)
        }
        ArrayGroup::Alt(a, b) => {
            let saved = *it;
            check_array_group(a, it, total).or_else(|_| {
                *it = saved;
                check_array_group(b, it, total)
            })
        }
        ArrayGroup::Opt(a) => {
            let saved = *it;
            if check_array_group(a, it, total).is_err() {
                *it = saved;
            }
            Ok(())
        }
        ArrayGroup::Star(a) => {
            loop {
                let saved = *it;
                match check_array_group(a, it, total) {
                    Ok(()) if it.remaining() < saved.remaining() => {}
                    Ok(()) => break,
                    Err(_) => {
                        *it = saved;
                        break;
                    }
                }
            }
            Ok(())
        }
    }
}

/// Compares `k` with the concatenation `h ++ p`.
fn cmp_concat(k: &[u8], h: &[u8], p: &[u8]) -> Ordering {
    let n = k.len().min(h.len());
    match k[..n].cmp(&h[..n]) {
        Ordering::Equal if k.len() <= h.len() => k.len().cmp(&(h.len() + p.len())),
        Ordering::Equal => k[h.len()..].cmp(p),
        o => o,
    }
}

/// Deterministic encoding of a literal type, as header and payload.
pub(crate) fn literal_parts<'t>(t: &'t TypeExpr, head: &mut [u8; 9]) -> Option<(usize, &'t [u8])> {
    let (h, payload): (Header, &[u8]) = match t {
        TypeExpr::LitInt(n) if *n >= 0 => (Header::minimal(Major::UInt, u64::try_from(*n).ok()?), &[]),
        TypeExpr::LitInt(n) => (Header::minimal(Major::NInt, u64::try_from(-1 - *n).ok()?), &[]),
        TypeExpr::LitText(s) => (Header::minimal(Major::Text, s.len() as u64), s.as_bytes()),
        TypeExpr::LitSimple(v) => (Header::minimal(Major::Simple, *v as u64), &[]),
        _ => return None,
    };
    let n = encode_header(h, head).ok()?;
    Some((n, payload))
}

/// The entry whose key is the literal `key`, scanning the sorted map and
/// stopping at the first larger key.
pub(crate) fn find_literal<'a>(key: &TypeExpr, map: MapIter<'a>) -> Option<(ItemRef<'a>, ItemRef<'a>)> {
    let mut head = [0u8; 9];
    let (n, payload) = literal_parts(key, &mut head)?;
    for (k, v) in map {
        match cmp_concat(k.bytes(), &head[..n], payload) {
            Ordering::Less => continue,
            Ordering::Equal => return Some((k, v)),
            Ordering::Greater => return None,
        }
    }
    None
}

pub(crate) fn commits(g: &MapGroup, map: MapIter<'_>) -> bool {
    match g {
        MapGroup::Entry { key, cut: true, .. } => find_literal(key, map).is_some(),
        MapGroup::Concat(a, _) | MapGroup::Opt(a) => commits(a, map),
        MapGroup::Alt(a, b) => commits(a, map) || commits(b, map),
        _ => false,
    }
}

pub(crate) fn table_hit(
    key: &TypeExpr,
    excluded: &[crate::ast::Atom],
    value: &TypeExpr,
    k: ItemRef<'_>,
    v: ItemRef<'_>,
) -> bool {
    matches(key, k) && matches(value, v) && !excluded.iter().any(|a| matches(&a.key, k) && matches(&a.value, v))
}

pub(crate) fn check_map_group<'a>(g: &MapGroup, map: MapIter<'a>, rem: &mut u64) -> Check<'a> {
    match g {
        MapGroup::Empty => Ok(()),
        MapGroup::Entry { key, value, cut } => {
            let Some((k, v)) = find_literal(key, map) else { return mismatch() };
            match check_type(value, v) {
                Ok(()) => {
                    *rem -= 1;
                    Ok(())
                }
                Err(f) => {
                    let kind =
                        if *cut { ValidationErrorKind::CutViolation } else { ValidationErrorKind::SchemaMismatch };
                    Err(Fail { kind, path: f.path }.at(Seg::Key(k)))
                }
            }
        }
        MapGroup::Table { key, excluded, value } => {
            let hits = map.filter(|(k, v)| table_hit(key, excluded, value, *k, *v)).count();
            *rem -= hits as u64;
            Ok(())
        }
        MapGroup::Concat(a, b) => {
            check_map_group(a, map, rem)?;
            check_map_group(b, map, rem)
        }
        MapGroup::Alt(a, b) => check_map_alt(a, b, map, rem),
        MapGroup::Opt(a) => check_map_alt(a, &MapGroup::Empty, map, rem),
        MapGroup::Star(a) => {
            loop {
                let saved = *rem;
                match check_map_group(a, map, rem) {
                    Ok(()) if *rem < saved => {}
                    Ok(()) => break,
                    Err(f) if f.kind == ValidationErrorKind::CutViolation => return Err(f),
                    Err(_) => {
                        *rem = saved;
                        break;
                    }
                }
            }
            Ok(())
        }
    }
}

fn check_map_alt<'a>(a: &MapGroup, b: &MapGroup, map: MapIter<'a>, rem: &mut u64) -> Check<'a> {
    let saved = *rem;
    match check_map_group(a, map, rem) {
        Ok(()) => Ok(()),
        Err(f) if f.kind == ValidationErrorKind::CutViolation || commits(a, map) => Err(f),
        Err(_) => {
            *rem = saved;
            check_map_group(b, map, rem)
        }
    }
}

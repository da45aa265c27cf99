//! Structural reasoning on inlined types: disjointness, intersection and
//! inclusion. All three are sound and incomplete; array and map types are
//! compared only by their first item or by equality.

use crate::ast::{ArrayGroup, StrKind, TypeExpr, INT_MAX, INT_MIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disjointness {
    Disjoint,
    MaybeOverlapping,
}

/// One choice-free piece of a type.
#[derive(Debug, Clone, PartialEq)]
enum Flat<'a> {
    Any,
    Int(i128, i128),
    Str(StrKind, u64, u64),
    Lit(&'a str),
    Simple(u8),
    Tagged(u64, &'a TypeExpr),
    Array(&'a ArrayGroup),
    Map(&'a TypeExpr),
}

fn flatten<'a>(t: &'a TypeExpr, out: &mut Vec<Flat<'a>>) {
    match t {
        TypeExpr::Any | TypeExpr::Ref(_) => out.push(Flat::Any),
        TypeExpr::Never => {}
        TypeExpr::Int => out.push(Flat::Int(INT_MIN, INT_MAX)),
        TypeExpr::UInt => out.push(Flat::Int(0, INT_MAX)),
        TypeExpr::NInt => out.push(Flat::Int(INT_MIN, -1)),
        TypeExpr::LitInt(n) => out.push(Flat::Int(*n, *n)),
        TypeExpr::Range(lo, hi) => {
            let (lo, hi) = ((*lo).max(INT_MIN), (*hi).min(INT_MAX));
            if lo <= hi {
                out.push(Flat::Int(lo, hi));
            }
        }
        TypeExpr::Tstr => out.push(Flat::Str(StrKind::Text, 0, u64::MAX)),
        TypeExpr::Bstr => out.push(Flat::Str(StrKind::Bytes, 0, u64::MAX)),
        TypeExpr::Sized { kind, lo, hi } => {
            if lo <= hi {
                out.push(Flat::Str(*kind, *lo, *hi));
            }
        }
        TypeExpr::LitText(s) => out.push(Flat::Lit(s)),
        TypeExpr::LitSimple(v) => out.push(Flat::Simple(*v)),
        TypeExpr::Choice(a, b) => {
            flatten(a, out);
            flatten(b, out);
        }
        TypeExpr::Tagged(tag, t) => out.push(Flat::Tagged(*tag, t)),
        TypeExpr::Array(g) => out.push(Flat::Array(g)),
        TypeExpr::Map(_) => out.push(Flat::Map(t)),
    }
}

fn flat(t: &TypeExpr) -> Vec<Flat<'_>> {
    let mut out = Vec::new();
    flatten(t, &mut out);
    out
}

/// True when no item can match `t`.
pub fn is_empty(t: &TypeExpr) -> bool {
    flat(t).is_empty()
}

fn len_in(s: &str, lo: u64, hi: u64) -> bool {
    (lo..=hi).contains(&(s.len() as u64))
}

fn flat_disjoint(a: &Flat<'_>, b: &Flat<'_>) -> bool {
    match (a, b) {
        (Flat::Any, _) | (_, Flat::Any) => false,
        (Flat::Int(l1, h1), Flat::Int(l2, h2)) => h1 < l2 || h2 < l1,
        (Flat::Str(k1, l1, h1), Flat::Str(k2, l2, h2)) => k1 != k2 || h1 < l2 || h2 < l1,
        (Flat::Lit(s), Flat::Str(k, lo, hi)) | (Flat::Str(k, lo, hi), Flat::Lit(s)) => {
            *k != StrKind::Text || !len_in(s, *lo, *hi)
        }
        (Flat::Lit(a), Flat::Lit(b)) => a != b,
        (Flat::Simple(a), Flat::Simple(b)) => a != b,
        (Flat::Tagged(t1, x), Flat::Tagged(t2, y)) => t1 != t2 || check_disjoint(x, y) == Disjointness::Disjoint,
        (Flat::Array(g1), Flat::Array(g2)) => {
            // Both need a first element and no element fits both.
            !nullable(g1) && !nullable(g2) && check_disjoint(&first(g1), &first(g2)) == Disjointness::Disjoint
        }
        (Flat::Map(_), Flat::Map(_)) => false,
        _ => std::mem::discriminant(a) != std::mem::discriminant(b),
    }
}

/// `Disjoint` only if no item matches both types.
pub fn check_disjoint(t1: &TypeExpr, t2: &TypeExpr) -> Disjointness {
    let (a, b) = (flat(t1), flat(t2));
    if a.iter().all(|x| b.iter().all(|y| flat_disjoint(x, y))) {
        Disjointness::Disjoint
    } else {
        Disjointness::MaybeOverlapping
    }
}

pub fn disjoint(t1: &TypeExpr, t2: &TypeExpr) -> bool {
    check_disjoint(t1, t2) == Disjointness::Disjoint
}

fn int_type(lo: i128, hi: i128) -> TypeExpr {
    match (lo, hi) {
        _ if lo == hi => TypeExpr::LitInt(lo),
        (INT_MIN, INT_MAX) => TypeExpr::Int,
        (0, INT_MAX) => TypeExpr::UInt,
        (INT_MIN, -1) => TypeExpr::NInt,
        _ => TypeExpr::Range(lo, hi),
    }
}

fn str_type(kind: StrKind, lo: u64, hi: u64) -> TypeExpr {
    match (kind, lo, hi) {
        (StrKind::Text, 0, u64::MAX) => TypeExpr::Tstr,
        (StrKind::Bytes, 0, u64::MAX) => TypeExpr::Bstr,
        _ => TypeExpr::Sized { kind, lo, hi },
    }
}

fn unflatten(f: &Flat<'_>) -> TypeExpr {
    match f {
        Flat::Any => TypeExpr::Any,
        Flat::Int(lo, hi) => int_type(*lo, *hi),
        Flat::Str(k, lo, hi) => str_type(*k, *lo, *hi),
        Flat::Lit(s) => TypeExpr::LitText((*s).to_owned()),
        Flat::Simple(v) => TypeExpr::LitSimple(*v),
        Flat::Tagged(tag, t) => TypeExpr::Tagged(*tag, Box::new((*t).clone())),
        Flat::Array(g) => TypeExpr::array((*g).clone()),
        Flat::Map(t) => (*t).clone(),
    }
}

fn flat_intersect(a: &Flat<'_>, b: &Flat<'_>) -> Option<TypeExpr> {
    Some(match (a, b) {
        (Flat::Any, x) | (x, Flat::Any) => unflatten(x),
        (Flat::Int(l1, h1), Flat::Int(l2, h2)) => {
            let (lo, hi) = (*l1.max(l2), *h1.min(h2));
            if lo > hi {
                return None;
            }
            int_type(lo, hi)
        }
        (Flat::Str(k1, l1, h1), Flat::Str(k2, l2, h2)) => {
            let (lo, hi) = (*l1.max(l2), *h1.min(h2));
            if k1 != k2 || lo > hi {
                return None;
            }
            str_type(*k1, lo, hi)
        }
        (Flat::Lit(s), Flat::Str(StrKind::Text, lo, hi)) | (Flat::Str(StrKind::Text, lo, hi), Flat::Lit(s))
            if len_in(s, *lo, *hi) =>
        {
            TypeExpr::LitText((*s).to_owned())
        }
        (Flat::Lit(x), Flat::Lit(y)) if x == y => TypeExpr::LitText((*x).to_owned()),
        (Flat::Simple(x), Flat::Simple(y)) if x == y => TypeExpr::LitSimple(*x),
        (Flat::Tagged(t1, x), Flat::Tagged(t2, y)) if t1 == t2 => {
            let inner = intersect_under(x, y);
            if is_empty(&inner) {
                return None;
            }
            TypeExpr::Tagged(*t1, Box::new(inner))
        }
        (Flat::Array(x), Flat::Array(y)) if x == y => TypeExpr::array((*x).clone()),
        (Flat::Map(x), Flat::Map(y)) if x == y => (*x).clone(),
        _ => return None,
    })
}

fn choice_of(parts: Vec<TypeExpr>) -> TypeExpr {
    parts.into_iter().rev().reduce(|acc, t| TypeExpr::choice(t, acc)).unwrap_or(TypeExpr::Never)
}

/// A type matched only by items matching both arguments.
pub fn intersect_under(t1: &TypeExpr, t2: &TypeExpr) -> TypeExpr {
    let (a, b) = (flat(t1), flat(t2));
    let parts = a.iter().flat_map(|x| b.iter().filter_map(move |y| flat_intersect(x, y))).collect();
    choice_of(parts)
}

fn flat_covers(a: &Flat<'_>, b: &Flat<'_>) -> bool {
    match (a, b) {
        (Flat::Any, _) => true,
        (Flat::Int(l1, h1), Flat::Int(l2, h2)) => l1 <= l2 && h2 <= h1,
        (Flat::Str(k1, l1, h1), Flat::Str(k2, l2, h2)) => k1 == k2 && l1 <= l2 && h2 <= h1,
        (Flat::Str(StrKind::Text, lo, hi), Flat::Lit(s)) => len_in(s, *lo, *hi),
        (Flat::Lit(x), Flat::Lit(y)) => x == y,
        (Flat::Simple(x), Flat::Simple(y)) => x == y,
        (Flat::Tagged(t1, x), Flat::Tagged(t2, y)) => t1 == t2 && subsumes(x, y),
        (Flat::Array(x), Flat::Array(y)) => x == y,
        (Flat::Map(x), Flat::Map(y)) => x == y,
        _ => false,
    }
}

/// True only if every item matching `inner` matches `outer`.
pub fn subsumes(outer: &TypeExpr, inner: &TypeExpr) -> bool {
    let a = flat(outer);
    flat(inner).iter().all(|y| a.iter().any(|x| flat_covers(x, y)))
}

/// May the group match without consuming anything?
pub fn nullable(g: &ArrayGroup) -> bool {
    match g {
        ArrayGroup::Empty | ArrayGroup::Opt(_) | ArrayGroup::Star(_) => true,
        ArrayGroup::Elem(_) => false,
        ArrayGroup::Alt(a, b) => nullable(a) || nullable(b),
        ArrayGroup::Concat(a, b) => nullable(a) && nullable(b),
    }
}

/// Covers every item the group can consume first.
pub fn first(g: &ArrayGroup) -> TypeExpr {
    match g {
        ArrayGroup::Empty => TypeExpr::Never,
        ArrayGroup::Elem(t) => t.clone(),
        ArrayGroup::Alt(a, b) => TypeExpr::choice(first(a), first(b)),
        ArrayGroup::Opt(a) | ArrayGroup::Star(a) => first(a),
        ArrayGroup::Concat(a, b) if nullable(a) => TypeExpr::choice(first(a), first(b)),
        ArrayGroup::Concat(a, _) => first(a),
    }
}

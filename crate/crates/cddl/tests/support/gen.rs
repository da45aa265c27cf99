//! Random schemas, items and values over a small universe.

#![allow(dead_code)]

use std::borrow::Cow;

use canon_cbor::{mk_map, Item};
use canon_cddl::runtime::{AnyItem, List, Table, Value};
use canon_cddl::{ArrayGroup, Atom, MapGroup, StrKind, TypeExpr};
use rand::seq::SliceRandom;
use rand::Rng;

const INTS: [i128; 8] = [0, 1, 2, 18, 23, 24, -1, -25];
const TEXTS: [&str; 4] = ["", "a", "b", "CEO"];
const BYTES: [&[u8]; 3] = [b"", b"\x01", b"\x01\x02"];

/// The six-item universe used for exhaustive map checks.
pub fn universe6() -> Vec<Item> {
    vec![Item::UInt(0), Item::UInt(18), Item::NInt(0), Item::text("a"), Item::text("b"), Item::bytes(b"")]
}

fn int_item(n: i128) -> Item {
    Item::int(n).expect("small integer")
}

pub fn scalar_item<R: Rng>(rng: &mut R) -> Item {
    match rng.gen_range(0..10) {
        0..=3 => int_item(*INTS.choose(rng).unwrap()),
        4..=5 => Item::text(TEXTS.choose(rng).unwrap()),
        6 => Item::bytes(BYTES.choose(rng).unwrap()),
        7 => Item::Simple(*[20u8, 21, 22].choose(rng).unwrap()),
        8 => int_item(rng.gen_range(-300..300)),
        _ => Item::UInt(rng.gen()),
    }
}

/// Any item of bounded depth, with at most three children per container.
pub fn item<R: Rng>(rng: &mut R, depth: u32) -> Item {
    if depth == 0 || rng.gen_bool(0.6) {
        return scalar_item(rng);
    }
    match rng.gen_range(0..3) {
        0 => Item::Array((0..rng.gen_range(0..4)).map(|_| item(rng, depth - 1)).collect()),
        1 => {
            let entries = (0..rng.gen_range(0..4)).map(|_| (scalar_item(rng), item(rng, depth - 1))).collect();
            mk_map(dedup_keys(entries)).expect("distinct keys")
        }
        _ => Item::Tagged(*[1u64, 6, 24].choose(rng).unwrap(), Box::new(item(rng, depth - 1))),
    }
}

fn dedup_keys(mut entries: Vec<(Item, Item)>) -> Vec<(Item, Item)> {
    let mut seen: Vec<Item> = Vec::new();
    entries.retain(|(k, _)| {
        if seen.contains(k) {
            false
        } else {
            seen.push(k.clone());
            true
        }
    });
    entries
}

pub fn literal<R: Rng>(rng: &mut R) -> TypeExpr {
    match rng.gen_range(0..5) {
        0..=2 => TypeExpr::LitInt(*INTS.choose(rng).unwrap()),
        3 => TypeExpr::LitText(TEXTS.choose(rng).unwrap().to_string()),
        _ => TypeExpr::LitSimple(*[20u8, 21, 22].choose(rng).unwrap()),
    }
}

pub fn scalar_type<R: Rng>(rng: &mut R) -> TypeExpr {
    match rng.gen_range(0..12) {
        0 => TypeExpr::Any,
        1 => TypeExpr::Int,
        2 => TypeExpr::UInt,
        3 => TypeExpr::NInt,
        4 => TypeExpr::Tstr,
        5 => TypeExpr::Bstr,
        6 | 7 => literal(rng),
        8 => {
            let lo = rng.gen_range(-30..30);
            TypeExpr::Range(lo, lo + rng.gen_range(0..30))
        }
        9 => {
            let lo = rng.gen_range(0..2);
            let kind = if rng.gen() { StrKind::Text } else { StrKind::Bytes };
            TypeExpr::Sized { kind, lo, hi: lo + rng.gen_range(0..2) }
        }
        10 => TypeExpr::bool(),
        _ => TypeExpr::Never,
    }
}

/// A random inlined type; many of these are rejected by elaboration.
pub fn type_expr<R: Rng>(rng: &mut R, depth: u32) -> TypeExpr {
    if depth == 0 || rng.gen_bool(0.35) {
        return scalar_type(rng);
    }
    match rng.gen_range(0..5) {
        0 => TypeExpr::choice(type_expr(rng, depth - 1), type_expr(rng, depth - 1)),
        1 => TypeExpr::Tagged(*[1u64, 6, 24].choose(rng).unwrap(), Box::new(type_expr(rng, depth - 1))),
        2 | 3 => TypeExpr::array(array_group(rng, depth - 1)),
        _ => TypeExpr::map(map_group(rng, depth - 1)),
    }
}

pub fn array_group<R: Rng>(rng: &mut R, depth: u32) -> ArrayGroup {
    if depth == 0 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.1) {
            ArrayGroup::Empty
        } else {
            ArrayGroup::Elem(type_expr(rng, depth.saturating_sub(1)))
        };
    }
    match rng.gen_range(0..5) {
        0 | 1 => ArrayGroup::concat(array_group(rng, depth - 1), array_group(rng, depth - 1)),
        2 => ArrayGroup::alt(array_group(rng, depth - 1), array_group(rng, depth - 1)),
        3 => ArrayGroup::opt(array_group(rng, depth - 1)),
        _ => ArrayGroup::star(array_group(rng, depth - 1)),
    }
}

pub fn entry<R: Rng>(rng: &mut R, depth: u32) -> MapGroup {
    let value = type_expr(rng, depth.saturating_sub(1));
    if rng.gen_bool(0.75) {
        MapGroup::entry(literal(rng), value, rng.gen())
    } else {
        MapGroup::entry(scalar_type(rng), value, false)
    }
}

pub fn map_group<R: Rng>(rng: &mut R, depth: u32) -> MapGroup {
    if depth == 0 || rng.gen_bool(0.3) {
        return entry(rng, depth);
    }
    match rng.gen_range(0..7) {
        0 | 1 => MapGroup::concat(map_group(rng, depth - 1), map_group(rng, depth - 1)),
        2 => MapGroup::alt(map_group(rng, depth - 1), map_group(rng, depth - 1)),
        3 => MapGroup::opt(map_group(rng, depth - 1)),
        4 => MapGroup::star(MapGroup::entry(scalar_type(rng), type_expr(rng, depth - 1), false)),
        5 => MapGroup::star(MapGroup::alt(
            MapGroup::entry(scalar_type(rng), type_expr(rng, depth - 1), false),
            MapGroup::entry(scalar_type(rng), type_expr(rng, depth - 1), false),
        )),
        _ => MapGroup::Empty,
    }
}

fn ints_of(t: &TypeExpr) -> Option<(i128, i128)> {
    match t {
        TypeExpr::Int => Some((-30, 30)),
        TypeExpr::UInt => Some((0, 30)),
        TypeExpr::NInt => Some((-30, -1)),
        TypeExpr::Range(lo, hi) => Some((*lo, *hi)),
        TypeExpr::LitInt(n) => Some((*n, *n)),
        _ => None,
    }
}

/// An item that often, but not always, matches `t`.
pub fn item_for<R: Rng>(rng: &mut R, t: &TypeExpr, depth: u32) -> Item {
    if rng.gen_bool(0.05) {
        return item(rng, depth.min(2));
    }
    if let Some((lo, hi)) = ints_of(t) {
        return int_item(rng.gen_range(lo..=hi));
    }
    match t {
        TypeExpr::Any | TypeExpr::Never | TypeExpr::Ref(_) => item(rng, depth.min(2)),
        TypeExpr::Tstr => Item::text(TEXTS.choose(rng).unwrap()),
        TypeExpr::Bstr => Item::bytes(BYTES.choose(rng).unwrap()),
        TypeExpr::LitText(s) => Item::text(s),
        TypeExpr::LitSimple(v) => Item::Simple(*v),
        TypeExpr::Sized { kind, lo, hi } => {
            let n = rng.gen_range(*lo..=*hi + 1) as usize;
            match kind {
                StrKind::Text => Item::text(&"x".repeat(n)),
                StrKind::Bytes => Item::bytes(&vec![7; n]),
            }
        }
        TypeExpr::Choice(a, b) => {
            let t = if rng.gen() { a } else { b };
            item_for(rng, t, depth)
        }
        TypeExpr::Tagged(tag, t) => Item::Tagged(*tag, Box::new(item_for(rng, t, depth))),
        TypeExpr::Array(g) => {
            let mut out = Vec::new();
            items_for(rng, g, depth.saturating_sub(1), &mut out);
            Item::Array(out)
        }
        TypeExpr::Map(g) => {
            let mut out = Vec::new();
            entries_for(rng, g, depth.saturating_sub(1), &mut out);
            mk_map(dedup_keys(out)).expect("distinct keys")
        }
        _ => scalar_item(rng),
    }
}

fn items_for<R: Rng>(rng: &mut R, g: &ArrayGroup, depth: u32, out: &mut Vec<Item>) {
    match g {
        ArrayGroup::Empty => {}
        ArrayGroup::Elem(t) => out.push(item_for(rng, t, depth)),
        ArrayGroup::Concat(a, b) => {
            items_for(rng, a, depth, out);
            items_for(rng, b, depth, out);
        }
        ArrayGroup::Alt(a, b) => {
            let g = if rng.gen() { a } else { b };
            items_for(rng, g, depth, out)
        }
        ArrayGroup::Opt(a) => {
            if rng.gen() {
                items_for(rng, a, depth, out)
            }
        }
        ArrayGroup::Star(a) => {
            for _ in 0..rng.gen_range(0..4) {
                items_for(rng, a, depth, out)
            }
        }
    }
}

fn entries_for<R: Rng>(rng: &mut R, g: &MapGroup, depth: u32, out: &mut Vec<(Item, Item)>) {
    match g {
        MapGroup::Empty => {}
        MapGroup::Entry { key, value, .. } => out.push((item_for(rng, key, 0), item_for(rng, value, depth))),
        MapGroup::Table { key, value, .. } => {
            for _ in 0..rng.gen_range(0..4) {
                out.push((item_for(rng, key, 0), item_for(rng, value, depth)))
            }
        }
        MapGroup::Concat(a, b) => {
            entries_for(rng, a, depth, out);
            entries_for(rng, b, depth, out);
        }
        MapGroup::Alt(a, b) => {
            let g = if rng.gen() { a } else { b };
            entries_for(rng, g, depth, out)
        }
        MapGroup::Opt(a) => {
            if rng.gen() {
                entries_for(rng, a, depth, out)
            }
        }
        MapGroup::Star(a) => {
            for _ in 0..rng.gen_range(0..4) {
                entries_for(rng, a, depth, out)
            }
        }
    }
}

/// A value of the shape of elaborated type `t`; not necessarily
/// serializable.
pub fn value_for<R: Rng>(rng: &mut R, t: &TypeExpr, depth: u32) -> Value<'static> {
    if let Some((lo, hi)) = ints_of(t) {
        if !matches!(t, TypeExpr::LitInt(_)) {
            let n = rng.gen_range(lo..=hi);
            return if n >= 0 { Value::UInt(n as u64) } else { Value::NInt((-1 - n) as u64) };
        }
    }
    match t {
        TypeExpr::LitInt(_) | TypeExpr::LitText(_) | TypeExpr::LitSimple(_) => Value::Unit,
        TypeExpr::Any | TypeExpr::Never | TypeExpr::Ref(_) => Value::Any(AnyItem::Owned(item(rng, depth.min(2)))),
        TypeExpr::Tstr => Value::Text(Cow::Owned(TEXTS.choose(rng).unwrap().to_string())),
        TypeExpr::Bstr => Value::bytes(BYTES.choose(rng).unwrap()),
        TypeExpr::Sized { kind, lo, hi } => {
            let n = rng.gen_range(*lo..=*hi) as usize;
            match kind {
                StrKind::Text => Value::text(&"y".repeat(n)),
                StrKind::Bytes => Value::bytes(&vec![3; n]),
            }
        }
        TypeExpr::Choice(a, b) => {
            if rng.gen() {
                Value::left(value_for(rng, a, depth))
            } else {
                Value::right(value_for(rng, b, depth))
            }
        }
        TypeExpr::Tagged(_, t) => value_for(rng, t, depth),
        TypeExpr::Array(g) => array_value(rng, g, depth.saturating_sub(1)),
        TypeExpr::Map(g) => map_value(rng, g, depth.saturating_sub(1)),
        _ => unreachable!("integer types handled above"),
    }
}

fn array_value<R: Rng>(rng: &mut R, g: &ArrayGroup, depth: u32) -> Value<'static> {
    match g {
        ArrayGroup::Empty => Value::Unit,
        ArrayGroup::Elem(t) => value_for(rng, t, depth),
        ArrayGroup::Concat(a, b) => Value::pair(array_value(rng, a, depth), array_value(rng, b, depth)),
        ArrayGroup::Alt(a, b) => {
            if rng.gen() {
                Value::left(array_value(rng, a, depth))
            } else {
                Value::right(array_value(rng, b, depth))
            }
        }
        ArrayGroup::Opt(a) => {
            if rng.gen() {
                Value::some(array_value(rng, a, depth))
            } else {
                Value::None
            }
        }
        ArrayGroup::Star(a) => {
            Value::List(List::Owned((0..rng.gen_range(0..4)).map(|_| array_value(rng, a, depth)).collect()))
        }
    }
}

fn map_value<R: Rng>(rng: &mut R, g: &MapGroup, depth: u32) -> Value<'static> {
    match g {
        MapGroup::Empty => Value::Unit,
        MapGroup::Entry { key, value, .. } => Value::pair(value_for(rng, key, 0), value_for(rng, value, depth)),
        MapGroup::Table { key, value, .. } => Value::Table(Table::Owned(
            (0..rng.gen_range(0..4)).map(|_| (value_for(rng, key, 0), value_for(rng, value, depth))).collect(),
        )),
        MapGroup::Concat(a, b) => Value::pair(map_value(rng, a, depth), map_value(rng, b, depth)),
        MapGroup::Alt(a, b) => {
            if rng.gen() {
                Value::left(map_value(rng, a, depth))
            } else {
                Value::right(map_value(rng, b, depth))
            }
        }
        MapGroup::Opt(a) => {
            if rng.gen() {
                Value::some(map_value(rng, a, depth))
            } else {
                Value::None
            }
        }
        MapGroup::Star(_) => unreachable!("elaborated groups have no stars"),
    }
}

/// Key and value types for the star-rewrite check.
pub fn entry_parts() -> (Vec<TypeExpr>, Vec<TypeExpr>) {
    let keys = vec![
        TypeExpr::UInt,
        TypeExpr::LitInt(0),
        TypeExpr::LitText("a".into()),
        TypeExpr::Tstr,
        TypeExpr::Any,
        TypeExpr::Int,
    ];
    let values = vec![TypeExpr::Any, TypeExpr::UInt, TypeExpr::Tstr, TypeExpr::LitInt(18)];
    (keys, values)
}

/// Exclusion sets of every table in `g`.
pub fn tables(g: &MapGroup, out: &mut Vec<Vec<Atom>>) {
    match g {
        MapGroup::Table { excluded, .. } => out.push(excluded.clone()),
        MapGroup::Concat(a, b) | MapGroup::Alt(a, b) => {
            tables(a, out);
            tables(b, out);
        }
        MapGroup::Opt(a) | MapGroup::Star(a) => tables(a, out),
        _ => {}
    }
}

/// `n` random types that elaborate, each with its elaborated schema.
pub fn accepted_schemas<R: Rng>(rng: &mut R, n: usize) -> Vec<(TypeExpr, canon_cddl::elab::ElabSchema)> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let t = type_expr(rng, 4);
        if let Ok(es) = canon_cddl::elab::elaborate(&t) {
            out.push((t, es));
        }
    }
    out
}

/// Test items for `t`: mostly shaped after it, some arbitrary.
pub fn items_for_type<R: Rng>(rng: &mut R, t: &TypeExpr, n: usize) -> Vec<Item> {
    (0..n).map(|i| if i % 4 == 3 { item(rng, 3) } else { item_for(rng, t, 4) }).collect()
}

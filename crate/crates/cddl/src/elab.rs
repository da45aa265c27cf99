//! Elaboration: rewrite map groups into the deterministic subset, annotate
//! tables with the entries earlier groups may leave behind, reject
//! ambiguous schemas, and compute the shape of parsed values.

use std::fmt;

use thiserror::Error;

use crate::ast::{ArrayGroup, Atom, MapGroup, Schema, TypeExpr, INT_MAX};
use crate::parse::inline;
use crate::sem::is_det_form;
use crate::typeops::{disjoint, first, intersect_under, is_empty, nullable, subsumes};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElabErrorKind {
    NonDeterministicMapGroup,
    NonDisjointAlternatives,
    GreedyStarOverlap,
    FootprintOverlap,
}

impl ElabErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            ElabErrorKind::NonDeterministicMapGroup => "NonDeterministicMapGroup",
            ElabErrorKind::NonDisjointAlternatives => "NonDisjointAlternatives",
            ElabErrorKind::GreedyStarOverlap => "GreedyStarOverlap",
            ElabErrorKind::FootprintOverlap => "FootprintOverlap",
        }
    }
}

/// `path` locates the offending node: `$` is the root, `[]` enters an array,
/// `{}` a map, `#n` a tag payload, `/k` and `/v` an entry's key and value.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}: at {path}: {detail}", kind.code())]
pub struct ElabError {
    pub kind: ElabErrorKind,
    pub path: String,
    pub detail: String,
}

type Result<T> = std::result::Result<T, ElabError>;

fn fail<T>(kind: ElabErrorKind, path: &str, detail: impl Into<String>) -> Result<T> {
    Err(ElabError { kind, path: path.to_owned(), detail: detail.into() })
}

/// Structure of parsed values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Shape {
    Unit,
    UInt,
    NInt,
    Int,
    Text,
    Bytes,
    /// An unconstrained item, kept as CBOR.
    Any,
    Sum(Box<Shape>, Box<Shape>),
    Pair(Box<Shape>, Box<Shape>),
    List(Box<Shape>),
    Table(Box<Shape>, Box<Shape>),
    Option(Box<Shape>),
}

impl Shape {
    pub fn sum(a: Shape, b: Shape) -> Shape {
        Shape::Sum(Box::new(a), Box::new(b))
    }

    pub fn pair(a: Shape, b: Shape) -> Shape {
        Shape::Pair(Box::new(a), Box::new(b))
    }

    pub fn list(a: Shape) -> Shape {
        Shape::List(Box::new(a))
    }

    pub fn table(k: Shape, v: Shape) -> Shape {
        Shape::Table(Box::new(k), Box::new(v))
    }

    pub fn option(a: Shape) -> Shape {
        Shape::Option(Box::new(a))
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Unit => f.write_str("Unit"),
            Shape::UInt => f.write_str("UInt"),
            Shape::NInt => f.write_str("NInt"),
            Shape::Int => f.write_str("Int"),
            Shape::Text => f.write_str("Text"),
            Shape::Bytes => f.write_str("Bytes"),
            Shape::Any => f.write_str("Any"),
            Shape::Sum(a, b) => write!(f, "Sum({a}, {b})"),
            Shape::Pair(a, b) => write!(f, "Pair({a}, {b})"),
            Shape::List(a) => write!(f, "List({a})"),
            Shape::Table(k, v) => write!(f, "Table({k}, {v})"),
            Shape::Option(a) => write!(f, "Option({a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElabSchema {
    pub ty: TypeExpr,
    pub shape: Shape,
    /// One line per rewrite applied.
    pub notes: Vec<String>,
}

/// Elaborates the root of a parsed schema.
pub fn elaborate_schema(schema: &Schema) -> Result<ElabSchema> {
    elaborate(&inline(schema))
}

/// `t` must be inlined.
pub fn elaborate(t: &TypeExpr) -> Result<ElabSchema> {
    let mut notes = Vec::new();
    let ty = elab_type(t, "$", &mut notes)?;
    let shape = interp_type(&ty);
    Ok(ElabSchema { ty, shape, notes })
}

fn elab_type(t: &TypeExpr, path: &str, notes: &mut Vec<String>) -> Result<TypeExpr> {
    Ok(match t {
        TypeExpr::Choice(a, b) => {
            let a = elab_type(a, path, notes)?;
            let b = elab_type(b, path, notes)?;
            if !disjoint(&a, &b) {
                return fail(ElabErrorKind::NonDisjointAlternatives, path, format!("`{a}` and `{b}` may overlap"));
            }
            TypeExpr::choice(a, b)
        }
        TypeExpr::Tagged(tag, t) => TypeExpr::Tagged(*tag, Box::new(elab_type(t, &format!("{path}#{tag}"), notes)?)),
        TypeExpr::Array(g) => {
            let path = format!("{path}[]");
            let g = elab_array(g, &path, notes)?;
            check_array(&g, &TypeExpr::Never, &path)?;
            TypeExpr::array(g)
        }
        TypeExpr::Map(g) => {
            let path = format!("{path}{{}}");
            let g = elab_map_types(g, &path, notes)?;
            let rewritten = rewrite_stars(&g, &path)?;
            if rewritten != g {
                notes.push(format!("{path}: star over alternatives split into a concatenation of stars"));
            }
            let (_, annotated) = annotate(&[], &rewritten);
            if annotated != rewritten {
                notes.push(format!("{path}: tables annotated with exclusions"));
            }
            check_map(&annotated, &path)?;
            TypeExpr::map(annotated)
        }
        t => t.clone(),
    })
}

fn elab_array(g: &ArrayGroup, path: &str, notes: &mut Vec<String>) -> Result<ArrayGroup> {
    Ok(match g {
        ArrayGroup::Empty => ArrayGroup::Empty,
        ArrayGroup::Elem(t) => ArrayGroup::Elem(elab_type(t, path, notes)?),
        ArrayGroup::Alt(a, b) => ArrayGroup::alt(elab_array(a, path, notes)?, elab_array(b, path, notes)?),
        ArrayGroup::Concat(a, b) => ArrayGroup::concat(elab_array(a, path, notes)?, elab_array(b, path, notes)?),
        ArrayGroup::Opt(a) => ArrayGroup::opt(elab_array(a, path, notes)?),
        ArrayGroup::Star(a) => ArrayGroup::star(elab_array(a, path, notes)?),
    })
}

fn elab_map_types(g: &MapGroup, path: &str, notes: &mut Vec<String>) -> Result<MapGroup> {
    Ok(match g {
        MapGroup::Empty => MapGroup::Empty,
        MapGroup::Entry { key, value, cut } => {
            let k = elab_type(key, &format!("{path}/k"), notes)?;
            let v = elab_type(value, &format!("{path}/v({key})"), notes)?;
            MapGroup::entry(k, v, *cut)
        }
        MapGroup::Table { key, excluded, value } => MapGroup::Table {
            key: elab_type(key, &format!("{path}/k"), notes)?,
            excluded: excluded.clone(),
            value: elab_type(value, &format!("{path}/v"), notes)?,
        },
        MapGroup::Alt(a, b) => MapGroup::alt(elab_map_types(a, path, notes)?, elab_map_types(b, path, notes)?),
        MapGroup::Concat(a, b) => MapGroup::concat(elab_map_types(a, path, notes)?, elab_map_types(b, path, notes)?),
        MapGroup::Opt(a) => MapGroup::opt(elab_map_types(a, path, notes)?),
        MapGroup::Star(a) => MapGroup::star(elab_map_types(a, path, notes)?),
    })
}

fn alt_entries<'a>(g: &'a MapGroup, out: &mut Vec<&'a MapGroup>) -> bool {
    match g {
        MapGroup::Alt(a, b) => alt_entries(a, out) && alt_entries(b, out),
        MapGroup::Entry { .. } => {
            out.push(g);
            true
        }
        _ => false,
    }
}

/// Splits every star over a choice of entries into a concatenation of
/// stars, then requires the deterministic subset.
pub fn rewrite_stars(g: &MapGroup, path: &str) -> Result<MapGroup> {
    let out = rewrite(g);
    if !is_det_form(&out) {
        return fail(
            ElabErrorKind::NonDeterministicMapGroup,
            path,
            "map groups need literal keys, or a star over a single `key => value` entry",
        );
    }
    Ok(out)
}

fn rewrite(g: &MapGroup) -> MapGroup {
    match g {
        MapGroup::Star(body) => {
            let mut entries = Vec::new();
            if matches!(**body, MapGroup::Alt(..)) && alt_entries(body, &mut entries) {
                let mut stars = entries.into_iter().rev().map(|e| MapGroup::star(e.clone()));
                let last = stars.next().expect("two or more entries");
                stars.fold(last, |acc, s| MapGroup::concat(s, acc))
            } else {
                MapGroup::star(rewrite(body))
            }
        }
        MapGroup::Alt(a, b) => MapGroup::alt(rewrite(a), rewrite(b)),
        MapGroup::Concat(a, b) => MapGroup::concat(rewrite(a), rewrite(b)),
        MapGroup::Opt(a) => MapGroup::opt(rewrite(a)),
        g => g.clone(),
    }
}

fn push_atom(t: &mut Vec<Atom>, a: Atom) {
    if !is_empty(&a.key) && !is_empty(&a.value) && !t.contains(&a) {
        t.push(a);
    }
}

fn intersect_atoms(a: &[Atom], b: &[Atom]) -> Vec<Atom> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            let atom = Atom { key: intersect_under(&x.key, &y.key), value: intersect_under(&x.value, &y.value) };
            push_atom(&mut out, atom);
        }
    }
    out
}

fn head_cut(g: &MapGroup) -> Option<&TypeExpr> {
    match g {
        MapGroup::Entry { key, cut: true, .. } => Some(key),
        MapGroup::Concat(a, _) => head_cut(a),
        _ => None,
    }
}

fn alt_chain<'a>(g: &'a MapGroup, out: &mut Vec<&'a MapGroup>) {
    match g {
        MapGroup::Alt(a, b) => {
            alt_chain(a, out);
            alt_chain(b, out);
        }
        MapGroup::Opt(a) => {
            alt_chain(a, out);
            out.push(&MapGroup::Empty);
        }
        g => out.push(g),
    }
}

/// Given a map with no entries matching `t`, returns the rewritten group and
/// entries that cannot remain after it succeeds. Tables exclude what earlier
/// groups may leave unconsumed.
pub fn annotate(t: &[Atom], g: &MapGroup) -> (Vec<Atom>, MapGroup) {
    let any = |key: &TypeExpr| Atom { key: key.clone(), value: TypeExpr::Any };
    match g {
        MapGroup::Empty => (t.to_vec(), MapGroup::Empty),
        MapGroup::Entry { key, .. } => {
            let mut out = t.to_vec();
            push_atom(&mut out, any(key));
            (out, g.clone())
        }
        MapGroup::Opt(e) if matches!(**e, MapGroup::Entry { .. }) => {
            let MapGroup::Entry { key, value, cut } = &**e else { unreachable!() };
            let mut out = t.to_vec();
            // An optional non-cut entry may leave its key behind with a
            // value outside `value`.
            let atom = if *cut { any(key) } else { Atom { key: key.clone(), value: value.clone() } };
            push_atom(&mut out, atom);
            (out, g.clone())
        }
        MapGroup::Alt(..) | MapGroup::Opt(_) => {
            let mut branches = Vec::new();
            alt_chain(g, &mut branches);
            let mut cur = t.to_vec();
            let mut result: Option<Vec<Atom>> = None;
            let mut rewritten = Vec::new();
            for b in branches {
                if let Some(k) = head_cut(b) {
                    // a failing branch that saw its cut key fails the choice
                    push_atom(&mut cur, any(k));
                }
                let (tb, gb) = annotate(&cur, b);
                result = Some(match result {
                    None => tb,
                    Some(r) => intersect_atoms(&r, &tb),
                });
                rewritten.push(gb);
            }
            (result.unwrap_or_default(), rebuild_chain(g, &mut rewritten.into_iter()))
        }
        MapGroup::Concat(a, b) => {
            let (t1, a) = annotate(t, a);
            let (t2, b) = annotate(&t1, b);
            (t2, MapGroup::concat(a, b))
        }
        MapGroup::Star(e) => match &**e {
            MapGroup::Entry { key, value, cut: false } => {
                let excluded =
                    t.iter().filter(|a| !disjoint(&a.key, key) && !disjoint(&a.value, value)).cloned().collect();
                (t.to_vec(), MapGroup::Table { key: key.clone(), excluded, value: value.clone() })
            }
            _ => (t.to_vec(), g.clone()),
        },
        MapGroup::Table { .. } => (t.to_vec(), g.clone()),
    }
}

fn rebuild_chain(g: &MapGroup, parts: &mut impl Iterator<Item = MapGroup>) -> MapGroup {
    match g {
        MapGroup::Alt(a, b) => {
            let a = rebuild_chain(a, parts);
            MapGroup::alt(a, rebuild_chain(b, parts))
        }
        MapGroup::Opt(a) => {
            let a = rebuild_chain(a, parts);
            parts.next();
            MapGroup::opt(a)
        }
        _ => parts.next().expect("one part per branch"),
    }
}

/// Entries a group may consume: key and value types, minus exclusions.
#[derive(Debug, Clone, PartialEq)]
pub struct FootAtom {
    pub key: TypeExpr,
    pub value: TypeExpr,
    pub excluded: Vec<Atom>,
}

pub fn footprint(g: &MapGroup) -> Vec<FootAtom> {
    let mut out = Vec::new();
    collect_footprint(g, &mut out);
    out
}

fn collect_footprint(g: &MapGroup, out: &mut Vec<FootAtom>) {
    match g {
        MapGroup::Empty => {}
        MapGroup::Entry { key, value, cut } => out.push(FootAtom {
            key: key.clone(),
            // a cut entry claims every value under its key
            value: if *cut { TypeExpr::Any } else { value.clone() },
            excluded: Vec::new(),
        }),
        MapGroup::Table { key, excluded, value } => {
            out.push(FootAtom { key: key.clone(), value: value.clone(), excluded: excluded.clone() })
        }
        MapGroup::Alt(a, b) | MapGroup::Concat(a, b) => {
            collect_footprint(a, out);
            collect_footprint(b, out);
        }
        MapGroup::Opt(a) | MapGroup::Star(a) => collect_footprint(a, out),
    }
}

fn excluded_by(x: &FootAtom, by: &FootAtom) -> bool {
    by.excluded.iter().any(|e| subsumes(&e.key, &x.key) && subsumes(&e.value, &x.value))
}

fn foot_disjoint(x: &FootAtom, y: &FootAtom) -> bool {
    disjoint(&x.key, &y.key) || disjoint(&x.value, &y.value) || excluded_by(x, y) || excluded_by(y, x)
}

fn footprints_disjoint(a: &[FootAtom], b: &[FootAtom]) -> bool {
    a.iter().all(|x| b.iter().all(|y| foot_disjoint(x, y)))
}

/// Does every success consume at least one entry?
fn needs_entry(g: &MapGroup) -> bool {
    match g {
        MapGroup::Entry { .. } => true,
        MapGroup::Concat(a, b) => needs_entry(a) || needs_entry(b),
        MapGroup::Alt(a, b) => needs_entry(a) && needs_entry(b),
        MapGroup::Empty | MapGroup::Opt(_) | MapGroup::Star(_) | MapGroup::Table { .. } => false,
    }
}

fn check_alt(g1: &MapGroup, g2: &MapGroup, path: &str) -> Result<()> {
    let f2 = footprint(g2);
    if let Some(k) = head_cut(g1) {
        let claim = [FootAtom { key: k.clone(), value: TypeExpr::Any, excluded: Vec::new() }];
        if footprints_disjoint(&claim, &f2) {
            return Ok(());
        }
    }
    if !footprints_disjoint(&footprint(g1), &f2) {
        return fail(
            ElabErrorKind::NonDisjointAlternatives,
            path,
            format!("alternatives `{g1}` and `{g2}` may consume the same entries"),
        );
    }
    if !needs_entry(g1) {
        return fail(
            ElabErrorKind::NonDisjointAlternatives,
            path,
            format!("`{g1}` may succeed on entries produced for the alternative after it"),
        );
    }
    Ok(())
}

/// Alternative and footprint checks on an annotated group.
pub fn check_map(g: &MapGroup, path: &str) -> Result<()> {
    match g {
        MapGroup::Alt(a, b) => {
            check_alt(a, b, path)?;
            check_map(a, path)?;
            check_map(b, path)
        }
        MapGroup::Opt(a) => {
            check_alt(a, &MapGroup::Empty, path)?;
            check_map(a, path)
        }
        MapGroup::Concat(a, b) => {
            if !footprints_disjoint(&footprint(a), &footprint(b)) {
                return fail(
                    ElabErrorKind::FootprintOverlap,
                    path,
                    format!("`{a}` and `{b}` may consume the same entries"),
                );
            }
            check_map(a, path)?;
            check_map(b, path)
        }
        MapGroup::Star(a) => check_map(a, path),
        MapGroup::Empty | MapGroup::Entry { .. } | MapGroup::Table { .. } => Ok(()),
    }
}

/// Checks that no greedy step can take an item a later part needs, and that
/// array alternatives are decided by their first item. `follow` covers the
/// items that may come right after `g`.
pub fn check_array(g: &ArrayGroup, follow: &TypeExpr, path: &str) -> Result<()> {
    let after = |next: &ArrayGroup| {
        if nullable(next) {
            TypeExpr::choice(first(next), follow.clone())
        } else {
            first(next)
        }
    };
    match g {
        ArrayGroup::Empty | ArrayGroup::Elem(_) => Ok(()),
        ArrayGroup::Concat(a, b) => {
            check_array(b, follow, path)?;
            check_array(a, &after(b), path)
        }
        ArrayGroup::Alt(a, b) => {
            if nullable(a) {
                return fail(
                    ElabErrorKind::NonDisjointAlternatives,
                    path,
                    format!("`{a}` may match nothing, hiding `{b}`"),
                );
            }
            if !disjoint(&first(a), &after(b)) {
                return fail(ElabErrorKind::NonDisjointAlternatives, path, format!("`{a}` and `{b}` may start alike"));
            }
            check_array(a, follow, path)?;
            check_array(b, follow, path)
        }
        ArrayGroup::Opt(a) => {
            if nullable(a) || !disjoint(&first(a), follow) {
                return fail(
                    ElabErrorKind::NonDisjointAlternatives,
                    path,
                    format!("`? {a}` may take an item the rest needs"),
                );
            }
            check_array(a, follow, path)
        }
        ArrayGroup::Star(a) => {
            if nullable(a) || !disjoint(&first(a), follow) {
                return fail(
                    ElabErrorKind::GreedyStarOverlap,
                    path,
                    format!("`* {a}` may take an item the rest needs"),
                );
            }
            check_array(a, &TypeExpr::choice(first(a), follow.clone()), path)
        }
    }
}

/// Shape of values parsed from an elaborated type.
pub fn interp_type(t: &TypeExpr) -> Shape {
    match t {
        TypeExpr::Any | TypeExpr::Never | TypeExpr::Ref(_) => Shape::Any,
        TypeExpr::Int => Shape::Int,
        TypeExpr::UInt => Shape::UInt,
        TypeExpr::NInt => Shape::NInt,
        TypeExpr::Tstr => Shape::Text,
        TypeExpr::Bstr => Shape::Bytes,
        TypeExpr::LitInt(_) | TypeExpr::LitText(_) | TypeExpr::LitSimple(_) => Shape::Unit,
        TypeExpr::Range(lo, hi) => {
            if *lo >= 0 && *hi <= INT_MAX {
                Shape::UInt
            } else if *hi < 0 {
                Shape::NInt
            } else {
                Shape::Int
            }
        }
        TypeExpr::Sized { kind: crate::ast::StrKind::Text, .. } => Shape::Text,
        TypeExpr::Sized { kind: crate::ast::StrKind::Bytes, .. } => Shape::Bytes,
        TypeExpr::Array(g) => array_shape(g),
        TypeExpr::Map(g) => map_shape(g),
        TypeExpr::Choice(a, b) => Shape::sum(interp_type(a), interp_type(b)),
        TypeExpr::Tagged(_, t) => interp_type(t),
    }
}

pub fn array_shape(g: &ArrayGroup) -> Shape {
    match g {
        ArrayGroup::Empty => Shape::Unit,
        ArrayGroup::Elem(t) => interp_type(t),
        ArrayGroup::Alt(a, b) => Shape::sum(array_shape(a), array_shape(b)),
        ArrayGroup::Concat(a, b) => Shape::pair(array_shape(a), array_shape(b)),
        ArrayGroup::Opt(a) => Shape::option(array_shape(a)),
        ArrayGroup::Star(a) => Shape::list(array_shape(a)),
    }
}

pub fn map_shape(g: &MapGroup) -> Shape {
    match g {
        MapGroup::Empty => Shape::Unit,
        MapGroup::Entry { key, value, .. } => Shape::pair(interp_type(key), interp_type(value)),
        MapGroup::Table { key, value, .. } => Shape::table(interp_type(key), interp_type(value)),
        MapGroup::Alt(a, b) => Shape::sum(map_shape(a), map_shape(b)),
        MapGroup::Concat(a, b) => Shape::pair(map_shape(a), map_shape(b)),
        MapGroup::Opt(a) => Shape::option(map_shape(a)),
        MapGroup::Star(a) => Shape::list(map_shape(a)),
    }
}

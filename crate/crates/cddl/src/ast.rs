//! Abstract syntax of CDDL types, array groups and map groups.

use std::fmt;

/// Smallest integer literal, `-2^64`.
pub const INT_MIN: i128 = -(1i128 << 64);
/// Largest integer literal, `2^64 - 1`.
pub const INT_MAX: i128 = (1i128 << 64) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrKind {
    Text,
    Bytes,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeExpr {
    Any,
    Int,
    UInt,
    NInt,
    Tstr,
    Bstr,
    /// Matches nothing.
    Never,
    LitInt(i128),
    LitText(String),
    /// Simple value, e.g. 20 for `false`.
    LitSimple(u8),
    /// Inclusive integer range.
    Range(i128, i128),
    /// String whose byte length lies in `lo..=hi`.
    Sized {
        kind: StrKind,
        lo: u64,
        hi: u64,
    },
    Array(Box<ArrayGroup>),
    Map(Box<MapGroup>),
    Choice(Box<TypeExpr>, Box<TypeExpr>),
    Tagged(u64, Box<TypeExpr>),
    Ref(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ArrayGroup {
    Empty,
    Elem(TypeExpr),
    Alt(Box<ArrayGroup>, Box<ArrayGroup>),
    Opt(Box<ArrayGroup>),
    Concat(Box<ArrayGroup>, Box<ArrayGroup>),
    Star(Box<ArrayGroup>),
}

/// One excluded `(key, value)` footprint; key-only exclusions use `Any`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub key: TypeExpr,
    pub value: TypeExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MapGroup {
    Empty,
    /// `key : value` when `cut`, `key => value` otherwise.
    Entry {
        key: TypeExpr,
        value: TypeExpr,
        cut: bool,
    },
    Alt(Box<MapGroup>, Box<MapGroup>),
    Opt(Box<MapGroup>),
    Concat(Box<MapGroup>, Box<MapGroup>),
    Star(Box<MapGroup>),
    /// Every entry matching `key => value` except those matching one of the
    /// `excluded` atoms. Produced by elaboration only.
    Table {
        key: TypeExpr,
        excluded: Vec<Atom>,
        value: TypeExpr,
    },
}

impl TypeExpr {
    pub fn choice(a: TypeExpr, b: TypeExpr) -> TypeExpr {
        TypeExpr::Choice(Box::new(a), Box::new(b))
    }

    pub fn array(g: ArrayGroup) -> TypeExpr {
        TypeExpr::Array(Box::new(g))
    }

    pub fn map(g: MapGroup) -> TypeExpr {
        TypeExpr::Map(Box::new(g))
    }

    /// `false / true`.
    pub fn bool() -> TypeExpr {
        TypeExpr::choice(TypeExpr::LitSimple(20), TypeExpr::LitSimple(21))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, TypeExpr::LitInt(_) | TypeExpr::LitText(_) | TypeExpr::LitSimple(_))
    }
}

impl ArrayGroup {
    pub fn concat(a: ArrayGroup, b: ArrayGroup) -> ArrayGroup {
        ArrayGroup::Concat(Box::new(a), Box::new(b))
    }

    pub fn alt(a: ArrayGroup, b: ArrayGroup) -> ArrayGroup {
        ArrayGroup::Alt(Box::new(a), Box::new(b))
    }

    pub fn opt(a: ArrayGroup) -> ArrayGroup {
        ArrayGroup::Opt(Box::new(a))
    }

    pub fn star(a: ArrayGroup) -> ArrayGroup {
        ArrayGroup::Star(Box::new(a))
    }
}

impl MapGroup {
    pub fn entry(key: TypeExpr, value: TypeExpr, cut: bool) -> MapGroup {
        MapGroup::Entry { key, value, cut }
    }

    pub fn concat(a: MapGroup, b: MapGroup) -> MapGroup {
        MapGroup::Concat(Box::new(a), Box::new(b))
    }

    pub fn alt(a: MapGroup, b: MapGroup) -> MapGroup {
        MapGroup::Alt(Box::new(a), Box::new(b))
    }

    pub fn opt(a: MapGroup) -> MapGroup {
        MapGroup::Opt(Box::new(a))
    }

    pub fn star(a: MapGroup) -> MapGroup {
        MapGroup::Star(Box::new(a))
    }
}

/// Named type rules with a designated root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub rules: Vec<(String, TypeExpr)>,
    pub root: String,
}

impl Schema {
    pub fn rule(&self, name: &str) -> Option<&TypeExpr> {
        self.rules.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    /// Same rules, rooted at `name`.
    pub fn with_root(&self, name: &str) -> Option<Schema> {
        self.rule(name)?;
        Some(Schema { rules: self.rules.clone(), root: name.to_owned() })
    }
}

// Printing. The output re-parses to the same tree: left-nested binary nodes
// are parenthesized, and cut entries with non-literal keys use `^ =>`.

fn write_text(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            '\r' => f.write_str("\\r")?,
            c if (c as u32) < 0x20 => write!(f, "\\u{:04x}", c as u32)?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Any => f.write_str("any"),
            TypeExpr::Int => f.write_str("int"),
            TypeExpr::UInt => f.write_str("uint"),
            TypeExpr::NInt => f.write_str("nint"),
            TypeExpr::Tstr => f.write_str("tstr"),
            TypeExpr::Bstr => f.write_str("bstr"),
            TypeExpr::Never => f.write_str("never"),
            TypeExpr::LitInt(n) => write!(f, "{n}"),
            TypeExpr::LitText(s) => write_text(f, s),
            TypeExpr::LitSimple(v) => write!(f, "#7.{v}"),
            TypeExpr::Range(lo, hi) => write!(f, "{lo}..{hi}"),
            TypeExpr::Sized { kind, lo, hi } => {
                let base = match kind {
                    StrKind::Text => "tstr",
                    StrKind::Bytes => "bstr",
                };
                if lo == hi {
                    write!(f, "{base} .size {lo}")
                } else {
                    write!(f, "{base} .size ({lo}..{hi})")
                }
            }
            TypeExpr::Array(g) => match &**g {
                ArrayGroup::Empty => f.write_str("[]"),
                g => write!(f, "[{g}]"),
            },
            TypeExpr::Map(g) => match &**g {
                MapGroup::Empty => f.write_str("{}"),
                g => write!(f, "{{{g}}}"),
            },
            TypeExpr::Choice(a, b) => {
                if matches!(**a, TypeExpr::Choice(..)) {
                    write!(f, "({a}) / {b}")
                } else {
                    write!(f, "{a} / {b}")
                }
            }
            TypeExpr::Tagged(tag, t) => write!(f, "#6.{tag}({t})"),
            TypeExpr::Ref(name) => f.write_str(name),
        }
    }
}

/// Type in a position where a following `/` or operator would bind wrongly.
struct Atomic<'a>(&'a TypeExpr);

impl fmt::Display for Atomic<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            t @ (TypeExpr::Choice(..) | TypeExpr::Sized { .. }) => write!(f, "({t})"),
            t => write!(f, "{t}"),
        }
    }
}

impl fmt::Display for ArrayGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArrayGroup::Empty => f.write_str("()"),
            ArrayGroup::Elem(t) => write!(f, "{t}"),
            ArrayGroup::Alt(a, b) => {
                if matches!(**a, ArrayGroup::Alt(..)) {
                    write!(f, "({a}) // {b}")
                } else {
                    write!(f, "{a} // {b}")
                }
            }
            ArrayGroup::Concat(a, b) => {
                let paren = |g: &ArrayGroup| matches!(g, ArrayGroup::Alt(..) | ArrayGroup::Concat(..));
                if paren(a) {
                    write!(f, "({a}), ")?;
                } else {
                    write!(f, "{a}, ")?;
                }
                if matches!(**b, ArrayGroup::Alt(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            ArrayGroup::Opt(a) => write!(f, "? {}", OccBody::Array(a)),
            ArrayGroup::Star(a) => write!(f, "* {}", OccBody::Array(a)),
        }
    }
}

impl fmt::Display for MapGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapGroup::Empty => f.write_str("()"),
            MapGroup::Entry { key, value, cut } => {
                let key_text = match key {
                    TypeExpr::Choice(..) | TypeExpr::Sized { .. } => format!("({key})"),
                    k => k.to_string(),
                };
                match (cut, key.is_literal()) {
                    (true, true) => write!(f, "{key_text} : {value}"),
                    (true, false) => write!(f, "{key_text} ^ => {value}"),
                    (false, _) => write!(f, "{key_text} => {value}"),
                }
            }
            MapGroup::Alt(a, b) => {
                if matches!(**a, MapGroup::Alt(..)) {
                    write!(f, "({a}) // {b}")
                } else {
                    write!(f, "{a} // {b}")
                }
            }
            MapGroup::Concat(a, b) => {
                let paren = |g: &MapGroup| matches!(g, MapGroup::Alt(..) | MapGroup::Concat(..));
                if paren(a) {
                    write!(f, "({a}), ")?;
                } else {
                    write!(f, "{a}, ")?;
                }
                if matches!(**b, MapGroup::Alt(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            MapGroup::Opt(a) => write!(f, "? {}", OccBody::Map(a)),
            MapGroup::Star(a) => write!(f, "* {}", OccBody::Map(a)),
            MapGroup::Table { key, excluded, value } => {
                // display only: exclusions have no concrete syntax
                write!(f, "* ({}", Atomic(key))?;
                for (i, a) in excluded.iter().enumerate() {
                    let sep = if i == 0 { " \\ " } else { " | " };
                    write!(f, "{sep}<{} => {}>", a.key, a.value)?;
                }
                write!(f, " => {value})")
            }
        }
    }
}

enum OccBody<'a> {
    Array(&'a ArrayGroup),
    Map(&'a MapGroup),
}

impl fmt::Display for OccBody<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // a bare number after `*` or `?` would read as an occurrence bound
            OccBody::Array(ArrayGroup::Elem(t @ (TypeExpr::LitInt(_) | TypeExpr::Range(..)))) => write!(f, "({t})"),
            OccBody::Array(ArrayGroup::Elem(t)) => write!(f, "{}", Atomic(t)),
            OccBody::Array(g) => write!(f, "({g})"),
            OccBody::Map(g) => write!(f, "({g})"),
        }
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // The root goes first so that re-parsing keeps it as the root.
        let root = self.rules.iter().filter(|(n, _)| *n == self.root);
        let rest = self.rules.iter().filter(|(n, _)| *n != self.root);
        for (name, t) in root.chain(rest) {
            writeln!(f, "{name} = {t}")?;
        }
        Ok(())
    }
}

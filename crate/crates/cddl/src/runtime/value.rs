//! Parsed values and their zero-copy parts.

use std::borrow::Cow;
use std::cmp::Ordering;

use canon_cbor::{ArrayIter, Item, ItemRef, MapIter, View};

use super::check::{check_array_group, check_map_group, find_literal, matches, table_hit};
use crate::ast::{ArrayGroup, Atom, MapGroup, TypeExpr};

/// A value inhabiting a [`Shape`](crate::elab::Shape). Borrowed variants
/// point into validated input and into the schema.
#[derive(Debug, Clone, PartialEq)]
pub enum Value<'a> {
    Unit,
    UInt(u64),
    /// Stands for `-1 - n`.
    NInt(u64),
    Text(Cow<'a, str>),
    Bytes(Cow<'a, [u8]>),
    Left(Box<Value<'a>>),
    Right(Box<Value<'a>>),
    Pair(Box<Value<'a>>, Box<Value<'a>>),
    None,
    Some(Box<Value<'a>>),
    List(List<'a>),
    Table(Table<'a>),
    Any(AnyItem<'a>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum List<'a> {
    Owned(Vec<Value<'a>>),
    Seed(ListSeed<'a>),
}

/// The run of array items matched by a star, parsed one step at a time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ListSeed<'a> {
    items: ArrayIter<'a>,
    body: &'a ArrayGroup,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Table<'a> {
    Owned(Vec<(Value<'a>, Value<'a>)>),
    Seed(TableSeed<'a>),
}

/// A whole map plus the predicates selecting the table's entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableSeed<'a> {
    entries: MapIter<'a>,
    key: &'a TypeExpr,
    excluded: &'a [Atom],
    value: &'a TypeExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnyItem<'a> {
    Ref(ItemRef<'a>),
    Owned(Item),
}

impl<'a> Value<'a> {
    pub fn left(v: Value<'a>) -> Value<'a> {
        Value::Left(Box::new(v))
    }

    pub fn right(v: Value<'a>) -> Value<'a> {
        Value::Right(Box::new(v))
    }

    pub fn pair(a: Value<'a>, b: Value<'a>) -> Value<'a> {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn some(v: Value<'a>) -> Value<'a> {
        Value::Some(Box::new(v))
    }

    pub fn text(s: &str) -> Value<'static> {
        Value::Text(Cow::Owned(s.to_owned()))
    }

    pub fn bytes(b: &[u8]) -> Value<'static> {
        Value::Bytes(Cow::Owned(b.to_vec()))
    }

    /// Integer value of `UInt` and `NInt`.
    pub fn as_int(&self) -> Option<i128> {
        match self {
            Value::UInt(n) => Some(*n as i128),
            Value::NInt(n) => Some(-1 - *n as i128),
            _ => None,
        }
    }

    /// Fully owned copy with seeds expanded and table entries sorted, so
    /// that equal values compare equal however they were built.
    pub fn normalize(&self) -> Value<'static> {
        match self {
            Value::Unit => Value::Unit,
            Value::UInt(n) => Value::UInt(*n),
            Value::NInt(n) => Value::NInt(*n),
            Value::Text(s) => Value::Text(Cow::Owned(s.clone().into_owned())),
            Value::Bytes(b) => Value::Bytes(Cow::Owned(b.clone().into_owned())),
            Value::Left(v) => Value::left(v.normalize()),
            Value::Right(v) => Value::right(v.normalize()),
            Value::Pair(a, b) => Value::pair(a.normalize(), b.normalize()),
            Value::None => Value::None,
            Value::Some(v) => Value::some(v.normalize()),
            Value::List(l) => Value::List(List::Owned(l.iter().map(|v| v.normalize()).collect())),
            Value::Table(t) => {
                let mut entries: Vec<_> = t.iter().map(|(k, v)| (k.normalize(), v.normalize())).collect();
                entries.sort_by(|a, b| cmp_values(&a.0, &b.0).then_with(|| cmp_values(&a.1, &b.1)));
                Value::Table(Table::Owned(entries))
            }
            Value::Any(AnyItem::Owned(x)) => Value::Any(AnyItem::Owned(x.clone())),
            Value::Any(AnyItem::Ref(r)) => {
                Value::Any(AnyItem::Owned(Item::decode(*r, usize::MAX).expect("validated item")))
            }
        }
    }
}

fn rank(v: &Value<'_>) -> u8 {
    match v {
        Value::Unit => 0,
        Value::UInt(_) => 1,
        Value::NInt(_) => 2,
        Value::Text(_) => 3,
        Value::Bytes(_) => 4,
        Value::Left(_) => 5,
        Value::Right(_) => 6,
        Value::Pair(..) => 7,
        Value::None => 8,
        Value::Some(_) => 9,
        Value::List(_) => 10,
        Value::Table(_) => 11,
        Value::Any(_) => 12,
    }
}

/// Total order on normalized values.
pub fn cmp_values(a: &Value<'_>, b: &Value<'_>) -> Ordering {
    match (a, b) {
        (Value::UInt(x), Value::UInt(y)) | (Value::NInt(x), Value::NInt(y)) => x.cmp(y),
        (Value::Text(x), Value::Text(y)) => x.cmp(y),
        (Value::Bytes(x), Value::Bytes(y)) => x.cmp(y),
        (Value::Left(x), Value::Left(y)) | (Value::Right(x), Value::Right(y)) | (Value::Some(x), Value::Some(y)) => {
            cmp_values(x, y)
        }
        (Value::Pair(a1, b1), Value::Pair(a2, b2)) => cmp_values(a1, a2).then_with(|| cmp_values(b1, b2)),
        (Value::List(x), Value::List(y)) => {
            let (x, y): (Vec<_>, Vec<_>) = (x.iter().collect(), y.iter().collect());
            cmp_seq(x.iter(), y.iter(), cmp_values)
        }
        (Value::Table(x), Value::Table(y)) => {
            let (x, y): (Vec<_>, Vec<_>) = (x.iter().collect(), y.iter().collect());
            cmp_seq(x.iter(), y.iter(), |p, q| cmp_values(&p.0, &q.0).then_with(|| cmp_values(&p.1, &q.1)))
        }
        (Value::Any(x), Value::Any(y)) => any_bytes(x).cmp(&any_bytes(y)),
        _ => rank(a).cmp(&rank(b)),
    }
}

fn cmp_seq<'x, T: 'x>(
    mut a: impl Iterator<Item = &'x T>,
    mut b: impl Iterator<Item = &'x T>,
    f: impl Fn(&T, &T) -> Ordering,
) -> Ordering {
    loop {
        match (a.next(), b.next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) => match f(x, y) {
                Ordering::Equal => {}
                o => return o,
            },
        }
    }
}

fn any_bytes<'a>(x: &'a AnyItem<'_>) -> Cow<'a, [u8]> {
    match x {
        AnyItem::Ref(r) => Cow::Borrowed(r.bytes()),
        AnyItem::Owned(i) => Cow::Owned(canon_cbor::encode(i)),
    }
}

impl<'a> List<'a> {
    pub fn iter(&self) -> ListIter<'_, 'a> {
        match self {
            List::Owned(v) => ListIter::Owned(v.iter()),
            List::Seed(s) => ListIter::Seed(s.iter()),
        }
    }

    pub fn is_seed(&self) -> bool {
        matches!(self, List::Seed(_))
    }
}

impl<'a> ListSeed<'a> {
    pub fn iter(&self) -> SeedIter<'a> {
        SeedIter { items: self.items, body: self.body }
    }

    /// Number of array items covered, not of elements yielded.
    pub fn item_count(&self) -> u64 {
        self.items.remaining()
    }
}

/// Parses one star step per call over the validated run.
#[derive(Debug, Clone)]
pub struct SeedIter<'a> {
    items: ArrayIter<'a>,
    body: &'a ArrayGroup,
}

impl<'a> Iterator for SeedIter<'a> {
    type Item = Value<'a>;

    fn next(&mut self) -> Option<Value<'a>> {
        if self.items.remaining() == 0 {
            return None;
        }
        Some(parse_array_group(self.body, &mut self.items))
    }
}

pub enum ListIter<'v, 'a> {
    Owned(std::slice::Iter<'v, Value<'a>>),
    Seed(SeedIter<'a>),
}

impl<'a> Iterator for ListIter<'_, 'a> {
    type Item = Value<'a>;

    fn next(&mut self) -> Option<Value<'a>> {
        match self {
            ListIter::Owned(it) => it.next().cloned(),
            ListIter::Seed(it) => it.next(),
        }
    }
}

impl<'a> Table<'a> {
    pub fn iter(&self) -> TableIter<'_, 'a> {
        match self {
            Table::Owned(v) => TableIter::Owned(v.iter()),
            Table::Seed(s) => TableIter::Seed(s.iter()),
        }
    }

    pub fn is_seed(&self) -> bool {
        matches!(self, Table::Seed(_))
    }
}

impl<'a> TableSeed<'a> {
    pub fn iter(&self) -> TableSeedIter<'a> {
        TableSeedIter { seed: *self }
    }
}

/// Scans the map, yielding the entries the table's predicates select.
#[derive(Debug, Clone)]
pub struct TableSeedIter<'a> {
    seed: TableSeed<'a>,
}

impl<'a> Iterator for TableSeedIter<'a> {
    type Item = (Value<'a>, Value<'a>);

    fn next(&mut self) -> Option<Self::Item> {
        let s = &mut self.seed;
        for (k, v) in s.entries.by_ref() {
            if table_hit(s.key, s.excluded, s.value, k, v) {
                return Some((parse_type(s.key, k), parse_type(s.value, v)));
            }
        }
        None
    }
}

pub enum TableIter<'v, 'a> {
    Owned(std::slice::Iter<'v, (Value<'a>, Value<'a>)>),
    Seed(TableSeedIter<'a>),
}

impl<'a> Iterator for TableIter<'_, 'a> {
    type Item = (Value<'a>, Value<'a>);

    fn next(&mut self) -> Option<Self::Item> {
        match self {
            TableIter::Owned(it) => it.next().cloned(),
            TableIter::Seed(it) => it.next(),
        }
    }
}

/// `x` must be valid for `t`.
pub(crate) fn parse_type<'a>(t: &'a TypeExpr, x: ItemRef<'a>) -> Value<'a> {
    match (t, x.view()) {
        (TypeExpr::Any | TypeExpr::Never | TypeExpr::Ref(_), _) => Value::Any(AnyItem::Ref(x)),
        (TypeExpr::Choice(a, b), _) => {
            if matches(a, x) {
                Value::left(parse_type(a, x))
            } else {
                Value::right(parse_type(b, x))
            }
        }
        (TypeExpr::LitInt(_) | TypeExpr::LitText(_) | TypeExpr::LitSimple(_), _) => Value::Unit,
        (_, View::Int { negative: false, arg }) => Value::UInt(arg.value()),
        (_, View::Int { negative: true, arg }) => Value::NInt(arg.value()),
        (TypeExpr::Tagged(_, t), View::Tagged { payload, .. }) => parse_type(t, payload),
        (_, View::Text(b)) => Value::Text(Cow::Borrowed(std::str::from_utf8(b).expect("validated UTF-8"))),
        (_, View::Bytes(b)) => Value::Bytes(Cow::Borrowed(b)),
        (TypeExpr::Array(g), View::Array(mut it)) => parse_array_group(g, &mut it),
        (TypeExpr::Map(g), View::Map(it)) => parse_map_group(g, it),
        _ => Value::Any(AnyItem::Ref(x)),
    }
}

fn probe_array(g: &ArrayGroup, it: &ArrayIter<'_>) -> bool {
    let mut probe = *it;
    let total = probe.remaining();
    check_array_group(g, &mut probe, total).is_ok()
}

pub(crate) fn parse_array_group<'a>(g: &'a ArrayGroup, it: &mut ArrayIter<'a>) -> Value<'a> {
    match g {
        ArrayGroup::Empty => Value::Unit,
        ArrayGroup::Elem(t) => parse_type(t, it.next().expect("validated array")),
        ArrayGroup::Concat(a, b) => {
            let a = parse_array_group(a, it);
            Value::pair(a, parse_array_group(b, it))
        }
        ArrayGroup::Alt(a, b) => {
            if probe_array(a, it) {
                Value::left(parse_array_group(a, it))
            } else {
                Value::right(parse_array_group(b, it))
            }
        }
        ArrayGroup::Opt(a) => {
            if probe_array(a, it) {
                Value::some(parse_array_group(a, it))
            } else {
                Value::None
            }
        }
        ArrayGroup::Star(a) => {
            let start = *it;
            let total = it.remaining();
            check_array_group(g, it, total).expect("star always succeeds");
            let run = start.take_prefix(start.remaining() - it.remaining());
            Value::List(List::Seed(ListSeed { items: run, body: a }))
        }
    }
}

fn probe_map(g: &MapGroup, map: MapIter<'_>) -> bool {
    let mut rem = map.remaining();
    check_map_group(g, map, &mut rem).is_ok()
}

pub(crate) fn parse_map_group<'a>(g: &'a MapGroup, map: MapIter<'a>) -> Value<'a> {
    match g {
        MapGroup::Empty => Value::Unit,
        MapGroup::Entry { key, value, .. } => {
            let (k, v) = find_literal(key, map).expect("validated entry");
            Value::pair(parse_type(key, k), parse_type(value, v))
        }
        MapGroup::Table { key, excluded, value } => {
            Value::Table(Table::Seed(TableSeed { entries: map, key, excluded, value }))
        }
        MapGroup::Concat(a, b) => Value::pair(parse_map_group(a, map), parse_map_group(b, map)),
        MapGroup::Alt(a, b) => {
            if probe_map(a, map) {
                Value::left(parse_map_group(a, map))
            } else {
                Value::right(parse_map_group(b, map))
            }
        }
        MapGroup::Opt(a) => {
            if probe_map(a, map) {
                Value::some(parse_map_group(a, map))
            } else {
                Value::None
            }
        }
        MapGroup::Star(_) => unreachable!("elaborated map groups have no bare stars"),
    }
}

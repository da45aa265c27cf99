//! Reference semantics over decoded items.
//!
//! Array groups are greedy and non-backtracking. Map groups are
//! nondeterministic: a group maps the set of entries still unconsumed to a
//! set of possible leftovers, or to `Bot` when a cut fires. Entry sets are
//! bitmasks over the map's entries in key order, so maps of more than 64
//! entries are out of scope here.
//!
//! Everything in this module is exponential in the worst case and meant as
//! a test oracle.

use std::collections::BTreeSet;

use canon_cbor::{mk_map, Item};

use crate::ast::{ArrayGroup, MapGroup, StrKind, TypeExpr};

/// Outcome of a map group: `Set` holds the possible remaining-entry masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapOutcome {
    Bot,
    Set(BTreeSet<u64>),
}

impl MapOutcome {
    fn one(rem: u64) -> MapOutcome {
        MapOutcome::Set(BTreeSet::from([rem]))
    }

    fn fail() -> MapOutcome {
        MapOutcome::Set(BTreeSet::new())
    }

    /// `Bot`, failure, or exactly one way to succeed.
    pub fn is_deterministic(&self) -> bool {
        match self {
            MapOutcome::Bot => true,
            MapOutcome::Set(s) => s.len() <= 1,
        }
    }
}

/// `t` must be inlined; references are treated as matching nothing.
pub fn type_sem(t: &TypeExpr, x: &Item) -> bool {
    match t {
        TypeExpr::Any => true,
        TypeExpr::Never | TypeExpr::Ref(_) => false,
        TypeExpr::Int => matches!(x, Item::UInt(_) | Item::NInt(_)),
        TypeExpr::UInt => matches!(x, Item::UInt(_)),
        TypeExpr::NInt => matches!(x, Item::NInt(_)),
        TypeExpr::Tstr => matches!(x, Item::Text(_)),
        TypeExpr::Bstr => matches!(x, Item::Bytes(_)),
        TypeExpr::LitInt(n) => x.as_int() == Some(*n),
        TypeExpr::LitText(s) => matches!(x, Item::Text(y) if y == s),
        TypeExpr::LitSimple(v) => *x == Item::Simple(*v),
        TypeExpr::Range(lo, hi) => x.as_int().is_some_and(|n| *lo <= n && n <= *hi),
        TypeExpr::Sized { kind, lo, hi } => {
            let len = match (kind, x) {
                (StrKind::Text, Item::Text(s)) => s.len(),
                (StrKind::Bytes, Item::Bytes(b)) => b.len(),
                _ => return false,
            } as u64;
            *lo <= len && len <= *hi
        }
        TypeExpr::Array(g) => match x {
            Item::Array(items) => array_group_sem(g, items) == Some(items.len()),
            _ => false,
        },
        TypeExpr::Map(g) => match x {
            Item::Map(m) => {
                assert!(m.len() <= 64, "map oracle handles at most 64 entries");
                match map_group_sem(g, m.entries()) {
                    MapOutcome::Bot => false,
                    MapOutcome::Set(s) => s.contains(&0),
                }
            }
            _ => false,
        },
        TypeExpr::Choice(a, b) => type_sem(a, x) || type_sem(b, x),
        TypeExpr::Tagged(tag, t) => matches!(x, Item::Tagged(n, p) if n == tag && type_sem(t, p)),
    }
}

/// Number of leading items consumed, or `None` on failure.
pub fn array_group_sem(g: &ArrayGroup, items: &[Item]) -> Option<usize> {
    match g {
        ArrayGroup::Empty => Some(0),
        ArrayGroup::Elem(t) => items.first().filter(|x| type_sem(t, x)).map(|_| 1),
        ArrayGroup::Concat(a, b) => {
            let n = array_group_sem(a, items)?;
            Some(n + array_group_sem(b, &items[n..])?)
        }
        ArrayGroup::Alt(a, b) => array_group_sem(a, items).or_else(|| array_group_sem(b, items)),
        ArrayGroup::Opt(a) => array_group_sem(a, items).or(Some(0)),
        ArrayGroup::Star(a) => {
            let mut n = 0;
            while let Some(k) = array_group_sem(a, &items[n..]).filter(|k| *k > 0) {
                n += k;
            }
            Some(n)
        }
    }
}

fn bits(rem: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| rem >> i & 1 == 1)
}

fn all(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Outcomes of `g` on all entries of the map.
pub fn map_group_sem(g: &MapGroup, entries: &[(Item, Item)]) -> MapOutcome {
    sem(g, entries, all(entries.len()))
}

/// Outcomes of `g` when only the entries in mask `rem` are left.
pub fn map_group_sem_from(g: &MapGroup, entries: &[(Item, Item)], rem: u64) -> MapOutcome {
    sem(g, entries, rem)
}

/// Would a failure of `g` on `rem` be final? True when a cut entry of the
/// group's leading part has its key present.
pub fn commits(g: &MapGroup, entries: &[(Item, Item)], rem: u64) -> bool {
    match g {
        MapGroup::Entry { key, cut: true, .. } => bits(rem).any(|i| type_sem(key, &entries[i].0)),
        MapGroup::Concat(a, _) | MapGroup::Opt(a) => commits(a, entries, rem),
        MapGroup::Alt(a, b) => commits(a, entries, rem) || commits(b, entries, rem),
        _ => false,
    }
}

fn sem(g: &MapGroup, entries: &[(Item, Item)], rem: u64) -> MapOutcome {
    match g {
        MapGroup::Empty => MapOutcome::one(rem),
        MapGroup::Entry { key, value, cut } => {
            let mut out = BTreeSet::new();
            for i in bits(rem) {
                let (k, v) = &entries[i];
                if type_sem(key, k) {
                    if type_sem(value, v) {
                        out.insert(rem & !(1 << i));
                    } else if *cut {
                        return MapOutcome::Bot;
                    }
                }
            }
            MapOutcome::Set(out)
        }
        MapGroup::Table { key, excluded, value } => {
            let mut left = rem;
            for i in bits(rem) {
                let (k, v) = &entries[i];
                let hit = type_sem(key, k)
                    && type_sem(value, v)
                    && !excluded.iter().any(|a| type_sem(&a.key, k) && type_sem(&a.value, v));
                if hit {
                    left &= !(1 << i);
                }
            }
            MapOutcome::one(left)
        }
        MapGroup::Concat(a, b) => {
            let MapOutcome::Set(first) = sem(a, entries, rem) else { return MapOutcome::Bot };
            let mut out = BTreeSet::new();
            for r in first {
                match sem(b, entries, r) {
                    MapOutcome::Bot => return MapOutcome::Bot,
                    MapOutcome::Set(s) => out.extend(s),
                }
            }
            MapOutcome::Set(out)
        }
        MapGroup::Alt(a, b) => alt(a, b, entries, rem),
        MapGroup::Opt(a) => alt(a, &MapGroup::Empty, entries, rem),
        MapGroup::Star(a) => {
            let mut out = BTreeSet::new();
            let mut seen = BTreeSet::from([rem]);
            let mut todo = vec![rem];
            while let Some(cur) = todo.pop() {
                match sem(a, entries, cur) {
                    MapOutcome::Bot => return MapOutcome::Bot,
                    MapOutcome::Set(s) => {
                        if s.is_empty() || s.contains(&cur) {
                            out.insert(cur);
                        }
                        for r in s {
                            if r != cur && seen.insert(r) {
                                todo.push(r);
                            }
                        }
                    }
                }
            }
            MapOutcome::Set(out)
        }
    }
}

fn alt(a: &MapGroup, b: &MapGroup, entries: &[(Item, Item)], rem: u64) -> MapOutcome {
    match sem(a, entries, rem) {
        MapOutcome::Bot => MapOutcome::Bot,
        MapOutcome::Set(s) if !s.is_empty() => MapOutcome::Set(s),
        _ if commits(a, entries, rem) => MapOutcome::fail(),
        _ => sem(b, entries, rem),
    }
}

/// Membership in the syntactic class of groups that are deterministic by
/// construction: literal-key entries and stars over non-cut entries, closed
/// under choice, option and concatenation.
pub fn is_det_form(g: &MapGroup) -> bool {
    match g {
        MapGroup::Empty | MapGroup::Table { .. } => true,
        MapGroup::Entry { key, .. } => key.is_literal(),
        MapGroup::Star(e) => matches!(**e, MapGroup::Entry { cut: false, .. }),
        MapGroup::Alt(a, b) | MapGroup::Concat(a, b) => is_det_form(a) && is_det_form(b),
        MapGroup::Opt(a) => is_det_form(a),
    }
}

/// Every map with distinct keys from `universe`, values from `universe`,
/// and at most `max_entries` entries.
pub fn small_maps(universe: &[Item], max_entries: usize) -> Vec<Vec<(Item, Item)>> {
    let mut keys: Vec<Item> = universe.to_vec();
    keys.sort();
    keys.dedup();
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    fn go(
        keys: &[Item],
        values: &[Item],
        max: usize,
        chosen: &mut Vec<(Item, Item)>,
        out: &mut Vec<Vec<(Item, Item)>>,
    ) {
        out.push(chosen.clone());
        if chosen.len() == max {
            return;
        }
        for (i, k) in keys.iter().enumerate() {
            for v in values {
                chosen.push((k.clone(), v.clone()));
                go(&keys[i + 1..], values, max, chosen, out);
                chosen.pop();
            }
        }
    }
    go(&keys, universe, max_entries, &mut chosen, &mut out);
    out.into_iter()
        .map(|e| match mk_map(e).expect("distinct keys") {
            Item::Map(m) => m.into_entries(),
            _ => unreachable!(),
        })
        .collect()
}

/// Brute force: is `g` deterministic on every small map over `universe`?
pub fn det_oracle(g: &MapGroup, universe: &[Item], max_entries: usize) -> bool {
    small_maps(universe, max_entries).iter().all(|m| map_group_sem(g, m).is_deterministic())
}

#[cfg(test)]
mod tests {
    use super::*;
    use TypeExpr::*;

    fn int(n: i128) -> Item {
        Item::int(n).unwrap()
    }

    fn map(e: Vec<(Item, Item)>) -> Vec<(Item, Item)> {
        match mk_map(e).unwrap() {
            Item::Map(m) => m.into_entries(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn types() {
        assert!(type_sem(&UInt, &int(42)));
        assert!(type_sem(
            &TypeExpr::choice(LitText("company".into()), LitText("nonprofit".into())),
            &Item::text("company")
        ));
        assert!(!type_sem(&NInt, &int(42)));
        assert!(type_sem(&Range(-2, 2), &int(-2)));
        assert!(!type_sem(&Sized { kind: StrKind::Bytes, lo: 2, hi: 2 }, &Item::bytes(b"a")));
    }

    #[test]
    fn greedy_arrays() {
        let items = [int(1), int(2), Item::text("a")];
        assert_eq!(array_group_sem(&ArrayGroup::star(ArrayGroup::Elem(UInt)), &items), Some(2));
        let star_then = ArrayGroup::concat(ArrayGroup::star(ArrayGroup::Elem(UInt)), ArrayGroup::Elem(UInt));
        assert_eq!(array_group_sem(&star_then, &[int(1)]), None);
        let alt =
            ArrayGroup::concat(ArrayGroup::alt(ArrayGroup::Elem(UInt), ArrayGroup::Elem(Any)), ArrayGroup::Elem(Tstr));
        assert_eq!(array_group_sem(&alt, &[Item::text("x"), Item::text("y")]), Some(2));
    }

    #[test]
    fn maps() {
        let m = map(vec![(int(18), int(21))]);
        let opt = MapGroup::opt(MapGroup::entry(LitInt(18), LitInt(42), false));
        assert_eq!(map_group_sem(&opt, &m), MapOutcome::one(1));
        let opt_cut = MapGroup::opt(MapGroup::entry(LitInt(18), LitInt(42), true));
        assert_eq!(map_group_sem(&opt_cut, &m), MapOutcome::Bot);
        let two = map(vec![(int(18), Item::text("foo")), (int(42), Item::text("bar"))]);
        let e = MapGroup::entry(UInt, Tstr, false);
        assert_eq!(map_group_sem(&e, &two), MapOutcome::Set(BTreeSet::from([1, 2])));
        let star = MapGroup::star(e.clone());
        assert_eq!(map_group_sem(&star, &two), MapOutcome::one(0));
    }

    #[test]
    fn det_form() {
        assert!(is_det_form(&MapGroup::opt(MapGroup::entry(LitInt(18), LitInt(42), true))));
        assert!(is_det_form(&MapGroup::star(MapGroup::entry(UInt, Any, false))));
        assert!(!is_det_form(&MapGroup::entry(UInt, Tstr, false)));
    }

    #[test]
    fn oracle() {
        let universe = [int(0), int(1), Item::text("a")];
        assert!(det_oracle(&MapGroup::star(MapGroup::entry(UInt, Any, false)), &universe, 3));
        assert!(!det_oracle(&MapGroup::entry(UInt, Tstr, false), &universe, 3));
        assert!(det_oracle(&MapGroup::entry(LitInt(18), LitInt(42), true), &universe, 3));
        assert_eq!(small_maps(&universe, 3).len(), 1 + 9 + 27 + 27);
    }
}

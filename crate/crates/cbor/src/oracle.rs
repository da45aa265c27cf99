//! Reference definitions of validity and equivalence on raw trees.
//!
//! Direct recursive definitions, quadratic on maps. Intended for tests and
//! small inputs.

use crate::raw::RawItem;

/// No map anywhere in `x` has two entries with equivalent keys.
pub fn valid(x: &RawItem) -> bool {
    match x {
        RawItem::Array { items, .. } => items.iter().all(valid),
        RawItem::Map { entries, .. } => {
            entries.iter().all(|(k, v)| valid(k) && valid(v))
                && entries.iter().enumerate().all(|(i, (k, _))| entries[..i].iter().all(|(k2, _)| !equiv(k, k2)))
        }
        RawItem::Tagged { payload, .. } => valid(payload),
        _ => true,
    }
}

/// Equal up to integer widths and map entry order.
pub fn equiv(x: &RawItem, y: &RawItem) -> bool {
    x == y || (valid(x) && valid(y) && same_shape(x, y))
}

fn same_shape(x: &RawItem, y: &RawItem) -> bool {
    match (x, y) {
        (RawItem::Int { negative: a, arg: m }, RawItem::Int { negative: b, arg: n }) => {
            a == b && m.value() == n.value()
        }
        (RawItem::Simple(a), RawItem::Simple(b)) => a == b,
        (RawItem::Bytes { payload: a, .. }, RawItem::Bytes { payload: b, .. }) => a == b,
        (RawItem::Text { payload: a, .. }, RawItem::Text { payload: b, .. }) => a == b,
        (RawItem::Tagged { tag: s, payload: a }, RawItem::Tagged { tag: t, payload: b }) => {
            s.value() == t.value() && equiv(a, b)
        }
        (RawItem::Array { items: a, .. }, RawItem::Array { items: b, .. }) => {
            a.len() == b.len() && a.iter().zip(b).all(|(a, b)| equiv(a, b))
        }
        (RawItem::Map { entries: a, .. }, RawItem::Map { entries: b, .. }) => {
            // keys are pairwise inequivalent on both sides, so inclusion plus
            // equal counts is a bijection
            a.len() == b.len() && a.iter().all(|(ka, va)| b.iter().any(|(kb, vb)| equiv(ka, kb) && equiv(va, vb)))
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::header::RawUint;

    fn wide(v: u64) -> RawItem {
        RawItem::Int { negative: false, arg: RawUint::new(v, 1).unwrap() }
    }

    #[test]
    fn validity_examples() {
        let dup = RawItem::map(vec![(RawItem::uint(0), RawItem::uint(1)), (wide(0), RawItem::uint(2))]);
        assert!(!valid(&dup));
        let ok = RawItem::map(vec![(RawItem::uint(0), RawItem::uint(1)), (RawItem::uint(1), RawItem::uint(2))]);
        assert!(valid(&ok));
        assert!(valid(&RawItem::array(vec![RawItem::uint(0), RawItem::uint(0)])));
    }

    #[test]
    fn equivalence_examples() {
        assert!(equiv(&RawItem::uint(10), &wide(10)));
        let e1 = (RawItem::uint(1), RawItem::text("a"));
        let e2 = (RawItem::text("k"), RawItem::uint(2));
        let m1 = RawItem::map(vec![e1.clone(), e2.clone()]);
        let m2 = RawItem::map(vec![e2, e1]);
        assert!(equiv(&m1, &m2));
        assert!(!equiv(&RawItem::uint(10), &RawItem::uint(11)));
        let m3 = RawItem::map(vec![(RawItem::uint(1), RawItem::uint(1))]);
        let m4 = RawItem::map(vec![(wide(1), RawItem::uint(2))]);
        assert!(!equiv(&m3, &m4));
    }
}

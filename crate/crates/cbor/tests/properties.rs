use canon_cbor::oracle::{equiv, valid};
use canon_cbor::*;
use proptest::collection::vec;
use proptest::prelude::*;

fn raw_uint() -> impl Strategy<Value = RawUint> {
    (any::<u64>(), 0u8..5, prop_oneof![Just(0u64), Just(24), Just(256), Just(u64::MAX)]).prop_filter_map(
        "fits",
        |(v, size, cap)| {
            let v = if cap == 0 { v } else { v % cap };
            RawUint::new(v, size).or_else(|| Some(RawUint::minimal(v)))
        },
    )
}

fn raw_item() -> impl Strategy<Value = RawItem> {
    let leaf = prop_oneof![
        (any::<bool>(), raw_uint()).prop_map(|(negative, arg)| RawItem::Int { negative, arg }),
        prop_oneof![0u8..24, 32u8..=255].prop_map(RawItem::Simple),
        vec(any::<u8>(), 0..6).prop_map(|b| RawItem::bytes(&b)),
        "[a-c\u{e9}]{0,4}".prop_map(|s| RawItem::text(&s)),
    ];
    leaf.prop_recursive(4, 48, 5, |inner| {
        prop_oneof![
            vec(inner.clone(), 0..5).prop_map(RawItem::array),
            vec((inner.clone(), inner.clone()), 0..4).prop_map(RawItem::map),
            (raw_uint(), inner).prop_map(|(tag, p)| RawItem::Tagged { tag, payload: Box::new(p) }),
        ]
    })
}

fn canon_item() -> impl Strategy<Value = Item> {
    let leaf = prop_oneof![
        any::<u64>().prop_map(Item::UInt),
        any::<u64>().prop_map(Item::NInt),
        (0u8..24).prop_map(Item::Simple),
        vec(any::<u8>(), 0..4).prop_map(Item::Bytes),
        "[ab]{0,3}".prop_map(Item::Text),
    ];
    leaf.prop_recursive(4, 48, 5, |inner| {
        prop_oneof![
            vec(inner.clone(), 0..5).prop_map(Item::Array),
            vec((inner.clone(), inner.clone()), 0..4).prop_map(|mut e| {
                e.sort_by(|a, b| a.0.cmp(&b.0));
                e.dedup_by(|a, b| a.0 == b.0);
                mk_map(e).unwrap()
            }),
            (0u64..30, inner).prop_map(|(t, p)| Item::Tagged(t, Box::new(p))),
        ]
    })
}

proptest! {
    #[test]
    fn raw_round_trip(x in raw_item()) {
        let bytes = to_vec_raw(&x).unwrap();
        prop_assert_eq!(size_raw(&x, usize::MAX).unwrap(), bytes.len());
        let (back, n) = parse_raw(&bytes, 64).unwrap();
        prop_assert_eq!(n, bytes.len());
        prop_assert_eq!(back, x);
    }

    #[test]
    fn size_bound_agrees(x in raw_item(), bound in 0usize..40) {
        let n = to_vec_raw(&x).unwrap().len();
        match size_raw(&x, bound) {
            Ok(m) => prop_assert!(m == n && n <= bound),
            Err(e) => prop_assert!(e == Error::TooLarge && n > bound),
        }
    }

    #[test]
    fn det_round_trip(x in canon_item()) {
        let bytes = encode(&x);
        prop_assert_eq!(det_check(&bytes), Ok(bytes.len()));
        let (back, _) = decode(&bytes).unwrap();
        prop_assert_eq!(encode(&back), bytes);
        prop_assert_eq!(back, x);
    }

    #[test]
    fn comparator_matches_bytes(x in canon_item(), y in canon_item()) {
        prop_assert_eq!(compare_det(&x, &y), encode(&x).cmp(&encode(&y)));
    }

    #[test]
    fn canonicalize_is_equivalent(x in raw_item()) {
        if let Ok(c) = canonicalize(&x, 16) {
            prop_assert!(valid(&x));
            let r = c.to_raw();
            prop_assert!(valid(&r));
            prop_assert!(equiv(&r, &x));
            prop_assert_eq!(det_check(&encode(&c)), Ok(encode(&c).len()));
        } else {
            prop_assert!(!valid(&x));
        }
    }

    #[test]
    fn det_check_agrees_with_canonical_form(x in raw_item()) {
        let bytes = to_vec_raw(&x).unwrap();
        let is_det = det_check(&bytes).is_ok();
        let canonical = canonicalize(&x, 16).map(|c| encode(&c) == bytes).unwrap_or(false);
        prop_assert_eq!(is_det, canonical);
    }

    #[test]
    fn mk_map_ignores_order(e in vec((canon_item(), canon_item()), 0..6), seed in any::<u64>()) {
        let mut rev = e.clone();
        rev.reverse();
        let n = rev.len().max(1);
        rev.rotate_left(seed as usize % n);
        prop_assert_eq!(mk_map(e), mk_map(rev));
    }

    #[test]
    fn equiv_is_an_equivalence(x in raw_item(), y in raw_item(), z in raw_item()) {
        prop_assert!(equiv(&x, &x));
        prop_assert_eq!(equiv(&x, &y), equiv(&y, &x));
        if equiv(&x, &y) && equiv(&y, &z) {
            prop_assert!(equiv(&x, &z));
        }
    }

    #[test]
    fn views_match_decoding(x in canon_item()) {
        let bytes = encode(&x);
        let (r, _) = parse_det(&bytes).unwrap();
        match (r.view(), &x) {
            (View::Array(it), Item::Array(items)) => {
                let got: Vec<Item> = it.map(|i| Item::decode(i, 64).unwrap()).collect();
                prop_assert_eq!(&got, items);
            }
            (View::Map(it), Item::Map(m)) => {
                let got: Vec<(Item, Item)> =
                    it.map(|(k, v)| (Item::decode(k, 64).unwrap(), Item::decode(v, 64).unwrap())).collect();
                prop_assert_eq!(got.as_slice(), m.entries());
            }
            (v, x) => prop_assert_eq!(Item::decode(r, 64).unwrap(), x.clone(), "{:?}", v),
        }
    }
}

#[test]
fn equivalent_width_keys_are_invalid() {
    let wide0 = RawItem::Int { negative: false, arg: RawUint::new(0, 1).unwrap() };
    let x = RawItem::map(vec![(RawItem::uint(0), RawItem::uint(1)), (wide0, RawItem::uint(2))]);
    assert!(!valid(&x));
    let bytes = to_vec_raw(&x).unwrap();
    assert_eq!(det_check(&bytes), Err(Error::NonMinimalInt));
}

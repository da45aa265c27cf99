//! Validation, parsing and serialization driven by an elaborated schema.

mod check;
mod ser;
mod value;

use canon_cbor::parse_det;

pub use check::{ValidationError, ValidationErrorKind};
pub use ser::{keys_increasing, serialize, sigma_check, to_vec, SerError, SigmaReason};
pub use value::{
    cmp_values, AnyItem, List, ListIter, ListSeed, SeedIter, Table, TableIter, TableSeed, TableSeedIter, Value,
};

use crate::elab::ElabSchema;

/// Checks deterministic encoding, then the schema; returns the item's size.
pub fn validate(es: &ElabSchema, input: &[u8]) -> Result<usize, ValidationError> {
    let (item, n) = parse_det(input)?;
    check::check_type(&es.ty, item).map_err(|f| f.into_error())?;
    Ok(n)
}

/// Validates, then parses the leading item; returns the value and the rest.
pub fn parse<'a>(es: &'a ElabSchema, input: &'a [u8]) -> Result<(Value<'a>, &'a [u8]), ValidationError> {
    let (item, n) = parse_det(input)?;
    check::check_type(&es.ty, item).map_err(|f| f.into_error())?;
    Ok((value::parse_type(&es.ty, item), &input[n..]))
}

#[cfg(test)]
mod tests {
    use canon_cbor::{encode, mk_map, Item};

    use super::*;
    use crate::elab::elaborate_schema;
    use crate::parse::parse_cddl;

    const ENTITY: &str = r#"entity = [ tstr, ("company" / "nonprofit"), { ? ("CEO": tstr), * (tstr => uint) } ]"#;

    fn schema(src: &str) -> ElabSchema {
        elaborate_schema(&parse_cddl(src).unwrap()).unwrap()
    }

    fn map(entries: Vec<(Item, Item)>) -> Item {
        mk_map(entries).unwrap()
    }

    fn int(n: i128) -> Item {
        Item::int(n).unwrap()
    }

    fn acme(ceo: Item) -> Vec<u8> {
        encode(&Item::Array(vec![
            Item::text("ACME Corp."),
            Item::text("company"),
            map(vec![(Item::text("J.D."), int(1842)), (Item::text("M.S."), int(1729)), (Item::text("CEO"), ceo)]),
        ]))
    }

    #[test]
    fn entity_instances_validate() {
        let es = schema(ENTITY);
        let bytes = acme(Item::text("J.D."));
        assert_eq!(validate(&es, &bytes), Ok(bytes.len()));
        let other = encode(&Item::Array(vec![
            Item::text("The Main St. Assoc."),
            Item::text("nonprofit"),
            map(vec![(Item::text("John S."), int(0))]),
        ]));
        assert!(validate(&es, &other).is_ok());
    }

    #[test]
    fn cut_violations() {
        let es = schema(ENTITY);
        let err = validate(&es, &acme(int(7))).unwrap_err();
        assert_eq!(err.kind, ValidationErrorKind::CutViolation);

        let es = schema("m = {18 : 42}");
        let err = validate(&es, &encode(&map(vec![(int(18), int(21))]))).unwrap_err();
        assert_eq!(err.kind, ValidationErrorKind::CutViolation);

        let es = schema("m = { ? 18 : 42 }");
        let err = validate(&es, &encode(&map(vec![(int(18), int(21))]))).unwrap_err();
        assert_eq!(err.kind, ValidationErrorKind::CutViolation);
        let es = schema("m = { ? 18 => 42 }");
        let err = validate(&es, &encode(&map(vec![(int(18), int(21))]))).unwrap_err();
        assert_eq!(err.kind, ValidationErrorKind::UnconsumedEntries);
    }

    #[test]
    fn rejects_non_deterministic_input() {
        let es = schema("u = uint");
        assert!(matches!(validate(&es, &[0x18, 0x17]).unwrap_err().kind, ValidationErrorKind::Cbor(_)));
        assert_eq!(validate(&es, &[0x61, 0x61]).unwrap_err().kind, ValidationErrorKind::SchemaMismatch);
    }

    #[test]
    fn parses_scalars_and_choices() {
        let es = schema("u = uint");
        assert_eq!(parse(&es, &[0x17]).unwrap(), (Value::UInt(23), &[][..]));
        let es = schema("u = uint / tstr");
        assert_eq!(parse(&es, &[0x61, b'a', 0x00]).unwrap(), (Value::right(Value::text("a")), &[0x00][..]));
        let es = schema("i = int");
        assert_eq!(parse(&es, &[0x20]).unwrap().0, Value::NInt(0));
    }

    #[test]
    fn parses_entity_with_table_seed() {
        let es = schema(ENTITY);
        let bytes = acme(Item::text("J.D."));
        let (v, rest) = parse(&es, &bytes).unwrap();
        assert!(rest.is_empty());
        let Value::Pair(name, rest) = &v else { panic!("{v:?}") };
        assert_eq!(**name, Value::text("ACME Corp."));
        let Value::Pair(status, rest) = &**rest else { panic!() };
        assert_eq!(**status, Value::left(Value::Unit));
        let Value::Pair(ceo, table) = &**rest else { panic!() };
        assert_eq!(**ceo, Value::some(Value::pair(Value::Unit, Value::text("J.D."))));
        let Value::Table(t) = &**table else { panic!() };
        assert!(t.is_seed());
        let got: Vec<_> = t.iter().map(|(k, v)| (k.normalize(), v)).collect();
        assert_eq!(got, vec![(Value::text("J.D."), Value::UInt(1842)), (Value::text("M.S."), Value::UInt(1729))]);
    }

    #[test]
    fn list_seeds() {
        let es = schema("l = [* uint]");
        let (v, _) = parse(&es, &[0x83, 0x00, 0x01, 0x02]).unwrap();
        let Value::List(l) = &v else { panic!() };
        let got: Vec<_> = l.iter().collect();
        assert_eq!(got, vec![Value::UInt(0), Value::UInt(1), Value::UInt(2)]);
        let (v, _) = parse(&es, &[0x80]).unwrap();
        let Value::List(l) = &v else { panic!() };
        assert_eq!(l.iter().count(), 0);
    }

    #[test]
    fn serialization_failures() {
        let es = schema("t = { * uint => uint }");
        let dup = Value::Table(Table::Owned(vec![(Value::UInt(1), Value::UInt(0)), (Value::UInt(1), Value::UInt(2))]));
        assert_eq!(sigma_check(&es, &dup), Err(SigmaReason::DuplicateTableKey));
        assert_eq!(to_vec(&es, &dup), Err(SerError::Sigma(SigmaReason::DuplicateTableKey)));

        let es = schema("t = { ? 18 : tstr, * uint => any }");
        let excluded = Value::pair(
            Value::None,
            Value::Table(Table::Owned(vec![(Value::UInt(18), Value::Any(AnyItem::Owned(int(0))))])),
        );
        assert_eq!(sigma_check(&es, &excluded), Err(SigmaReason::ExcludedKey));

        let es = schema("u = uint");
        assert_eq!(sigma_check(&es, &Value::UInt(42)), Ok(()));
        assert_eq!(sigma_check(&es, &Value::NInt(0)), Err(SigmaReason::ShapeMismatch));
        let es = schema("r = 0..9");
        assert_eq!(sigma_check(&es, &Value::UInt(10)), Err(SigmaReason::OutOfRange));
        let es = schema("s = bstr .size 2");
        assert_eq!(sigma_check(&es, &Value::bytes(&[1])), Err(SigmaReason::OutOfRange));
    }

    #[test]
    fn serializes_literals_and_small_buffers() {
        let es = schema("m = { 1 : 1 }");
        let v = Value::pair(Value::Unit, Value::Unit);
        assert_eq!(to_vec(&es, &v).unwrap(), vec![0xa1, 0x01, 0x01]);
        let mut out = [0u8; 2];
        assert_eq!(serialize(&es, &v, &mut out), Err(SerError::BufferTooSmall));
    }

    #[test]
    fn entity_round_trip() {
        let es = schema(ENTITY);
        let bytes = acme(Item::text("J.D."));
        let (v, _) = parse(&es, &bytes).unwrap();
        assert_eq!(to_vec(&es, &v).unwrap(), bytes);
        let owned = v.normalize();
        let again = to_vec(&es, &owned).unwrap();
        assert_eq!(again, bytes);
        assert_eq!(parse(&es, &again).unwrap().0.normalize(), owned);
    }

    #[test]
    fn map_entries_sorted_on_output() {
        let es = schema(r#"m = { "zz" : uint, 3 : tstr, * tstr => int }"#);
        let v = Value::pair(
            Value::pair(Value::Unit, Value::UInt(1)),
            Value::pair(
                Value::pair(Value::Unit, Value::text("x")),
                Value::Table(Table::Owned(vec![
                    (Value::text("b"), Value::NInt(4)),
                    (Value::text("a"), Value::UInt(0)),
                ])),
            ),
        );
        let bytes = to_vec(&es, &v).unwrap();
        assert!(canon_cbor::det_check(&bytes).is_ok(), "{bytes:02x?}");
        assert!(validate(&es, &bytes).is_ok());
    }
}

//! Typed view of a COSE header map.

use canon_cbor::Item;
use canon_cddl::runtime::{AnyItem, List, Table, Value};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Label {
    Int(i64),
    Text(String),
}

/// Header parameters. Both `iv` and `partial_iv` set is representable here
/// but not serializable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Headers {
    pub alg: Option<Label>,
    /// Empty when absent.
    pub crit: Vec<Label>,
    pub content_type: Option<Label>,
    pub kid: Option<Vec<u8>>,
    pub iv: Option<Vec<u8>>,
    pub partial_iv: Option<Vec<u8>>,
    /// Any other parameters, in no particular order.
    pub other: Vec<(Label, Item)>,
}

fn int_value(n: i64) -> Value<'static> {
    if n >= 0 {
        Value::UInt(n as u64)
    } else {
        Value::NInt(!(n as u64))
    }
}

/// Under `int / tstr`.
fn label_value(l: &Label) -> Value<'static> {
    match l {
        Label::Int(n) => Value::left(int_value(*n)),
        Label::Text(s) => Value::right(Value::text(s)),
    }
}

fn present(v: Value<'static>) -> Value<'static> {
    Value::some(Value::pair(Value::Unit, v))
}

fn optional<T>(x: &Option<T>, f: impl FnOnce(&T) -> Value<'static>) -> Value<'static> {
    x.as_ref().map_or(Value::None, |x| present(f(x)))
}

fn int_of(v: &Value<'_>) -> Option<i64> {
    v.as_int().and_then(|n| i64::try_from(n).ok())
}

fn label_of(v: &Value<'_>) -> Option<Label> {
    match v {
        Value::Left(n) => int_of(n).map(Label::Int),
        Value::Right(t) => text_of(t).map(Label::Text),
        _ => None,
    }
}

fn text_of(v: &Value<'_>) -> Option<String> {
    match v {
        Value::Text(s) => Some(s.to_string()),
        _ => None,
    }
}

fn bytes_of(v: &Value<'_>) -> Option<Vec<u8>> {
    match v {
        Value::Bytes(b) => Some(b.to_vec()),
        _ => None,
    }
}

/// Inner value of `? k : t`, which parses as `Some((unit, t))`.
fn field<'v, 'a>(v: &'v Value<'a>) -> Option<Option<&'v Value<'a>>> {
    match v {
        Value::None => Some(None),
        Value::Some(p) => match &**p {
            Value::Pair(_, x) => Some(Some(x)),
            _ => None,
        },
        _ => None,
    }
}

fn pair<'v, 'a>(v: &'v Value<'a>) -> Option<(&'v Value<'a>, &'v Value<'a>)> {
    match v {
        Value::Pair(a, b) => Some((a, b)),
        _ => None,
    }
}

fn item_of(v: &Value<'_>) -> Option<Item> {
    match v {
        Value::Any(AnyItem::Owned(x)) => Some(x.clone()),
        Value::Any(AnyItem::Ref(r)) => Item::decode(*r, usize::MAX).ok(),
        _ => None,
    }
}

impl Headers {
    pub fn is_empty(&self) -> bool {
        *self == Headers::default()
    }

    /// Value for the `header_map` schema.
    pub fn to_value(&self) -> Value<'static> {
        let crit = match self.crit.split_first() {
            None => Value::None,
            Some((first, rest)) => present(Value::pair(
                label_value(first),
                Value::List(List::Owned(rest.iter().map(label_value).collect())),
            )),
        };
        let content_type = optional(&self.content_type, |l| match l {
            Label::Text(s) => Value::left(Value::text(s)),
            Label::Int(n) => Value::right(int_value(*n)),
        });
        let iv = match (&self.iv, &self.partial_iv) {
            (None, None) => Value::None,
            (Some(iv), partial) => Value::some(Value::left(Value::pair(
                Value::pair(Value::Unit, Value::bytes(iv)),
                optional(partial, |p| Value::Any(AnyItem::Owned(Item::Bytes(p.clone())))),
            ))),
            (None, Some(p)) => Value::some(Value::right(Value::pair(Value::Unit, Value::bytes(p)))),
        };
        let other = self.other.iter().map(|(l, x)| (label_value(l), Value::Any(AnyItem::Owned(x.clone())))).collect();
        let generic = Value::pair(
            optional(&self.alg, label_value),
            Value::pair(crit, Value::pair(content_type, Value::pair(optional(&self.kid, |k| Value::bytes(k)), iv))),
        );
        Value::pair(generic, Value::Table(Table::Owned(other)))
    }

    /// Inverse of [`to_value`](Self::to_value) on values parsed under the
    /// `header_map` schema.
    pub fn from_value(v: &Value<'_>) -> Option<Headers> {
        let (generic, table) = pair(v)?;
        let (alg, rest) = pair(generic)?;
        let (crit, rest) = pair(rest)?;
        let (content_type, rest) = pair(rest)?;
        let (kid, iv) = pair(rest)?;
        let mut h = Headers {
            alg: match field(alg)? {
                None => None,
                Some(l) => Some(label_of(l)?),
            },
            kid: match field(kid)? {
                None => None,
                Some(k) => Some(bytes_of(k)?),
            },
            ..Headers::default()
        };
        if let Some(c) = field(crit)? {
            let (first, rest) = pair(c)?;
            h.crit.push(label_of(first)?);
            let Value::List(rest) = rest else { return None };
            for l in rest.iter() {
                h.crit.push(label_of(&l)?);
            }
        }
        h.content_type = match field(content_type)? {
            None => None,
            Some(Value::Left(t)) => Some(Label::Text(text_of(t)?)),
            Some(Value::Right(n)) => Some(Label::Int(int_of(n)?)),
            Some(_) => return None,
        };
        match iv {
            Value::None => {}
            Value::Some(b) => match &**b {
                Value::Left(p) => {
                    let (iv, partial) = pair(p)?;
                    h.iv = Some(bytes_of(pair(iv)?.1)?);
                    if field(partial)?.is_some() {
                        return None;
                    }
                }
                Value::Right(p) => h.partial_iv = Some(bytes_of(pair(p)?.1)?),
                _ => return None,
            },
            _ => return None,
        }
        let Value::Table(t) = table else { return None };
        for (k, x) in t.iter() {
            h.other.push((label_of(&k)?, item_of(&x)?));
        }
        Some(h)
    }
}

impl From<i64> for Label {
    fn from(n: i64) -> Self {
        Label::Int(n)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::Text(s.to_owned())
    }
}

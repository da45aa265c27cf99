//! Synthetic workloads: a flat record, lookups in a large map, and a large
//! array of arrays.

use std::hint::black_box;
use std::time::{Duration, Instant};

use canon_cbor::{encode, encode_header, mk_map, Header, Item, Major, MapIter, View};
use canon_cddl::elab::{elaborate_schema, ElabSchema};
use canon_cddl::parse_cddl;
use canon_cddl::runtime::{parse, serialize, validate, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const REC_SCHEMA: &str = "record = [uint, uint, uint, uint, uint, uint, uint, uint]";
pub const MAP_SCHEMA: &str = "table = { * uint => uint }";
pub const ARR_SCHEMA: &str = "matrix = [* [* uint]]";

pub const ITERS_VAR: &str = "CANON_BENCH_ITERS";
pub const DEFAULT_ITERS: usize = 5;

/// Iteration count from the environment, or the default.
pub fn iters_from_env() -> usize {
    std::env::var(ITERS_VAR).ok().and_then(|s| s.parse().ok()).filter(|&n| n > 0).unwrap_or(DEFAULT_ITERS)
}

pub fn schema(text: &str) -> ElabSchema {
    elaborate_schema(&parse_cddl(text).expect("bench schema parses")).expect("bench schema elaborates")
}

/// Median and minimum of `iters` timed runs of `f`.
#[derive(Debug, Clone, Copy)]
pub struct Timing {
    pub median: Duration,
    pub min: Duration,
}

pub fn time<T>(iters: usize, mut f: impl FnMut() -> T) -> Timing {
    let mut runs: Vec<Duration> = (0..iters.max(1))
        .map(|_| {
            let start = Instant::now();
            black_box(f());
            start.elapsed()
        })
        .collect();
    runs.sort();
    Timing { median: runs[runs.len() / 2], min: runs[0] }
}

fn ns_per(d: Duration, ops: usize) -> f64 {
    d.as_nanos() as f64 / ops as f64
}

#[derive(Debug, Clone)]
pub struct RecReport {
    pub records: usize,
    pub parse_ns: f64,
    pub serialize_ns: f64,
}

/// Validates, parses and re-serializes batches of 8-field records.
pub fn bench_rec(records: usize, iters: usize, seed: u64) -> RecReport {
    let es = schema(REC_SCHEMA);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<Vec<u8>> = (0..records)
        .map(|_| {
            let fields = (0..8).map(|_| Item::UInt(rng.gen::<u64>() >> rng.gen_range(0..64))).collect();
            encode(&Item::Array(fields))
        })
        .collect();
    let parse_t = time(iters, || {
        let mut acc = 0u64;
        for x in &inputs {
            let (v, _) = parse(&es, x).expect("valid record");
            if let Value::Pair(a, _) = v {
                if let Value::UInt(n) = *a {
                    acc = acc.wrapping_add(n);
                }
            }
        }
        acc
    });
    let values: Vec<Value<'_>> = inputs.iter().map(|x| parse(&es, x).expect("valid record").0).collect();
    let mut out = [0u8; 128];
    let ser_t = time(iters, || {
        let mut total = 0usize;
        for v in &values {
            total += serialize(&es, v, &mut out).expect("serializable record");
        }
        total
    });
    RecReport { records, parse_ns: ns_per(parse_t.median, records), serialize_ns: ns_per(ser_t.median, records) }
}

#[derive(Debug, Clone)]
pub struct MapReport {
    pub entries: usize,
    pub lookups: usize,
    pub validate_ns: f64,
    pub early_exit_ns: f64,
    pub linear_bytes_ns: f64,
    pub linear_decode_ns: f64,
    pub hit_ns: f64,
}

impl MapReport {
    pub fn speedup_bytes(&self) -> f64 {
        self.linear_bytes_ns / self.early_exit_ns
    }

    pub fn speedup_decode(&self) -> f64 {
        self.linear_decode_ns / self.early_exit_ns
    }
}

/// Encoded `{ * uint => uint }` map with `n` random keys, and `k` random
/// keys absent from it.
pub fn map_input(n: usize, k: usize, seed: u64) -> (Vec<u8>, Vec<u64>, Vec<u64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keys = std::collections::BTreeSet::new();
    while keys.len() < n {
        keys.insert(rng.gen::<u64>());
    }
    let mut absent = Vec::with_capacity(k);
    while absent.len() < k {
        let x = rng.gen::<u64>();
        if !keys.contains(&x) {
            absent.push(x);
        }
    }
    let present: Vec<u64> = keys.iter().copied().step_by((n / k.max(1)).max(1)).take(k).collect();
    let entries = keys.into_iter().map(|key| (Item::UInt(key), Item::UInt(rng.gen()))).collect();
    let map = mk_map(entries).expect("distinct keys");
    (encode(&map), absent, present)
}

/// Scans every entry, stopping only on a match.
pub fn find_linear_bytes<'a>(map: MapIter<'a>, key: &[u8]) -> Option<canon_cbor::ItemRef<'a>> {
    map.into_iter().find(|(k, _)| k.bytes() == key).map(|(_, v)| v)
}

/// Like [`find_linear_bytes`] but compares decoded integers, as a reader
/// that cannot rely on the encoding being unique must.
pub fn find_linear_decode<'a>(map: MapIter<'a>, key: u64) -> Option<canon_cbor::ItemRef<'a>> {
    map.into_iter()
        .find(|(k, _)| matches!(k.view(), View::Int { negative: false, arg } if arg.value() == key))
        .map(|(_, v)| v)
}

fn map_iter(input: &[u8]) -> MapIter<'_> {
    match canon_cbor::parse_det(input).expect("valid map").0.view() {
        View::Map(m) => m,
        _ => unreachable!("map input"),
    }
}

pub fn bench_map(n: usize, k: usize, iters: usize, seed: u64) -> MapReport {
    let es = schema(MAP_SCHEMA);
    let (input, absent, present) = map_input(n, k, seed);
    let validate_t = time(iters, || validate(&es, &input).expect("valid map"));
    let map = map_iter(&input);
    let absent_enc: Vec<Vec<u8>> = absent.iter().map(|&x| encode(&Item::UInt(x))).collect();
    let present_enc: Vec<Vec<u8>> = present.iter().map(|&x| encode(&Item::UInt(x))).collect();
    let early = time(iters, || absent_enc.iter().filter(|key| map.find_sorted(key).is_some()).count());
    let bytes = time(iters, || absent_enc.iter().filter(|key| find_linear_bytes(map, key).is_some()).count());
    let decode = time(iters, || absent.iter().filter(|&&key| find_linear_decode(map, key).is_some()).count());
    let hit = time(iters, || present_enc.iter().filter(|key| map.find_sorted(key).is_some()).count());
    MapReport {
        entries: n,
        lookups: k,
        validate_ns: ns_per(validate_t.median, 1),
        early_exit_ns: ns_per(early.median, k),
        linear_bytes_ns: ns_per(bytes.median, k),
        linear_decode_ns: ns_per(decode.median, k),
        hit_ns: ns_per(hit.median, present_enc.len().max(1)),
    }
}

/// `[* [* uint]]` instance: `n` arrays of `n` zeros.
pub fn arr_input(n: usize) -> Vec<u8> {
    let mut head = [0u8; 9];
    let outer = encode_header(Header::minimal(Major::Array, n as u64), &mut head).expect("header fits");
    let mut out = Vec::with_capacity(outer + n * (outer + n));
    out.extend_from_slice(&head[..outer]);
    let inner = encode_header(Header::minimal(Major::Array, n as u64), &mut head).expect("header fits");
    for _ in 0..n {
        out.extend_from_slice(&head[..inner]);
        out.resize(out.len() + n, 0);
    }
    out
}

/// Walks a parsed `[* [* uint]]` value; returns the element count and sum.
pub fn arr_walk(v: &Value<'_>) -> (u64, u64) {
    let Value::List(rows) = v else { unreachable!("matrix shape") };
    let (mut count, mut sum) = (0u64, 0u64);
    for row in rows.iter() {
        let Value::List(row) = row else { unreachable!("row shape") };
        for x in row.iter() {
            if let Value::UInt(n) = x {
                count += 1;
                sum = sum.wrapping_add(n);
            }
        }
    }
    (count, sum)
}

#[derive(Debug, Clone)]
pub struct ArrReport {
    pub n: usize,
    pub input_bytes: usize,
    pub elements: u64,
    pub validate_ns: f64,
    pub iterate_ns: f64,
    pub serialize_ns: f64,
    /// The parsed value borrows from the input instead of copying it.
    pub zero_copy: bool,
}

pub fn bench_arr(n: usize, iters: usize) -> ArrReport {
    let es = schema(ARR_SCHEMA);
    let input = arr_input(n);
    let validate_t = time(iters, || validate(&es, &input).expect("valid matrix"));
    let (v, _) = parse(&es, &input).expect("valid matrix");
    let zero_copy = matches!(&v, Value::List(l) if l.is_seed());
    let mut elements = 0;
    let iterate_t = time(iters, || {
        let (count, sum) = arr_walk(&v);
        elements = count;
        sum
    });
    let mut out = vec![0u8; input.len()];
    let ser_t = time(iters, || serialize(&es, &v, &mut out).expect("serializable matrix"));
    debug_assert!(out == input);
    ArrReport {
        n,
        input_bytes: input.len(),
        elements,
        validate_ns: ns_per(validate_t.median, 1),
        iterate_ns: ns_per(iterate_t.median, 1),
        serialize_ns: ns_per(ser_t.median, 1),
        zero_copy,
    }
}

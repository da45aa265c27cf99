//! End-to-end acceptance checks, one line per criterion.
//!
//! Everything runs inside one test so that timings and the allocation
//! counter are not disturbed by other tests running in parallel.

#[path = "../../cddl/tests/support/gen.rs"]
mod gen;

use std::alloc::{GlobalAlloc, Layout, System};
use std::collections::BTreeSet;
use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use canon_cbor::{compare_det, decode, det_check, encode, mk_map, validate_raw, Item};
use canon_cddl::elab::{elaborate_schema, ElabErrorKind};
use canon_cddl::parse_cddl;
use canon_cddl::runtime::{parse, sigma_check, to_vec, validate, ValidationErrorKind, Value};
use canon_cddl::sem::{map_group_sem, small_maps, type_sem, MapOutcome};
use canon_cddl::{MapGroup, TypeExpr};
use canon_cli::bench;
use canon_cose::{parse_key_okp, sign1_to_vec, verify1, CoseError, FakeProvider, Headers, Label};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Counting;

static LIVE: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            let now = LIVE.fetch_add(layout.size(), Ordering::Relaxed) + layout.size();
            PEAK.fetch_max(now, Ordering::Relaxed);
        }
        p
    }

    unsafe fn dealloc(&self, p: *mut u8, layout: Layout) {
        System.dealloc(p, layout);
        LIVE.fetch_sub(layout.size(), Ordering::Relaxed);
    }
}

#[global_allocator]
static ALLOC: Counting = Counting;

/// Peak heap growth above the level at entry while running `f`.
fn peak_growth<T>(f: impl FnOnce() -> T) -> (T, usize) {
    let base = LIVE.load(Ordering::Relaxed);
    PEAK.store(base, Ordering::Relaxed);
    let out = f();
    (out, PEAK.load(Ordering::Relaxed) - base)
}

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn int(n: i128) -> Item {
    Item::int(n).expect("in range")
}

fn canon_item<R: Rng>(rng: &mut R, depth: u32) -> Item {
    let leaf = depth == 0 || rng.gen_bool(0.55);
    if leaf {
        return match rng.gen_range(0..6) {
            0 => Item::UInt(rng.gen::<u64>() >> rng.gen_range(0..64)),
            1 => Item::NInt(rng.gen::<u64>() >> rng.gen_range(0..64)),
            2 => Item::Simple(*[20u8, 21, 22, 23, 0, 19, 32, 255].choose(rng).unwrap()),
            3 => Item::Bytes((0..rng.gen_range(0..30)).map(|_| rng.gen()).collect()),
            4 => Item::Text(
                (0..rng.gen_range(0..30)).map(|_| *['a', 'z', 'é', '€', '𝄞', '"'].choose(rng).unwrap()).collect(),
            ),
            _ => Item::UInt(rng.gen_range(0..30)),
        };
    }
    let fanout = rng.gen_range(0..=8);
    match rng.gen_range(0..3) {
        0 => Item::Array((0..fanout).map(|_| canon_item(rng, depth - 1)).collect()),
        1 => Item::Tagged(rng.gen::<u64>() >> rng.gen_range(0..64), Box::new(canon_item(rng, depth - 1))),
        _ => {
            let mut entries: Vec<(Item, Item)> = Vec::new();
            for _ in 0..fanout {
                let k = canon_item(rng, depth.min(2) - 1);
                if entries.iter().all(|(e, _)| *e != k) {
                    entries.push((k, canon_item(rng, depth - 1)));
                }
            }
            mk_map(entries).expect("distinct keys")
        }
    }
}

fn non_malleability() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let items: Vec<Item> = (0..10_000).map(|_| canon_item(&mut rng, 6)).collect();
    let mut identical = 0;
    for x in &items {
        let bytes = encode(x);
        let (back, n) = decode(&bytes).expect("own encoding decodes");
        if n == bytes.len() && back == *x && encode(&back) == bytes {
            identical += 1;
        }
    }
    let (mut mutated, mut distinguished) = (0, 0);
    while mutated < 1000 {
        let bytes = encode(items.choose(&mut rng).unwrap());
        let mut m = bytes.clone();
        let i = rng.gen_range(0..m.len());
        let b = rng.gen::<u8>();
        if m[i] == b {
            continue;
        }
        m[i] = b;
        mutated += 1;
        let caught = match det_check(&m) {
            Err(_) => true,
            Ok(n) => {
                let (x, _) = decode(&m).expect("checked");
                let again = encode(&x);
                again[..] == m[..n] && again != bytes
            }
        };
        distinguished += caught as usize;
    }
    verdict(
        identical == items.len() && distinguished == mutated,
        format!("round trips {identical}/10000, mutations {distinguished}/{mutated}"),
    )
}

fn comparator_universe() -> Vec<Item> {
    let mut u = Vec::new();
    for v in [0u64, 1, 10, 23, 24, 100, 255, 256, 1000, 65535, 65536, u32::MAX as u64, 1 << 32, u64::MAX] {
        u.push(Item::UInt(v));
        u.push(Item::NInt(v));
    }
    for s in [0u8, 1, 19, 20, 21, 22, 23, 32, 255] {
        u.push(Item::Simple(s));
    }
    for s in ["", "a", "b", "aa", "ab", "z", "é", "aaaaaaaaaaaaaaaaaaaaaaaa"] {
        u.push(Item::text(s));
        u.push(Item::bytes(s.as_bytes()));
    }
    u.push(Item::bytes(&[0xff; 24]));
    let scalars = u.clone();
    for (i, x) in scalars.iter().enumerate().step_by(3) {
        u.push(Item::Array(vec![x.clone()]));
        u.push(Item::Tagged(i as u64, Box::new(x.clone())));
        u.push(Item::Array(vec![x.clone(), scalars[(i + 7) % scalars.len()].clone()]));
        u.push(mk_map(vec![(x.clone(), Item::UInt(i as u64))]).unwrap());
    }
    u.push(Item::Array(vec![]));
    u.push(mk_map(vec![]).unwrap());
    u.push(Item::Tagged(u64::MAX, Box::new(Item::Array(vec![]))));
    u
}

fn comparator() -> Verdict {
    let u = comparator_universe();
    let enc: Vec<Vec<u8>> = u.iter().map(encode).collect();
    let mut mismatches = 0;
    for (x, ex) in u.iter().zip(&enc) {
        for (y, ey) in u.iter().zip(&enc) {
            mismatches += (compare_det(x, y) != ex.cmp(ey)) as usize;
        }
    }
    let pairs = u.len() * u.len();
    verdict(pairs >= 10_000 && mismatches == 0, format!("{} items, {pairs} pairs, {mismatches} mismatches", u.len()))
}

fn nested(depth: usize) -> Vec<u8> {
    let mut bytes = vec![0x81; depth];
    bytes.push(0x00);
    bytes
}

fn fastest(runs: usize, input: &[u8]) -> Duration {
    (0..runs)
        .map(|_| {
            let start = Instant::now();
            assert_eq!(validate_raw(input), Ok(input.len()));
            start.elapsed()
        })
        .min()
        .unwrap()
}

fn constant_stack() -> Verdict {
    let input = nested(1_000_000);
    let deep_ok = validate_raw(&input) == Ok(input.len()) && det_check(&input) == Ok(input.len());
    // both sizes well beyond cache
    let small = nested(16_000_000);
    let large = nested(32_000_000);
    let (a, b) = (fastest(7, &small), fastest(7, &large));
    let ratio = b.as_secs_f64() / a.as_secs_f64();
    verdict(
        deep_ok && (1.5..=2.5).contains(&ratio),
        format!("depth 10^6 valid={deep_ok}, time ratio for 2x input {ratio:.2}"),
    )
}

fn star_rewrite() -> Verdict {
    let (keys, values) = gen::entry_parts();
    let mut entries = Vec::new();
    for k in &keys {
        for v in &values {
            for cut in [false, true] {
                entries.push(MapGroup::entry(k.clone(), v.clone(), cut));
            }
        }
    }
    let maps = small_maps(&gen::universe6(), 3);
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let (mut pairs, mut agree) = (0usize, 0usize);
    for _ in 0..200 {
        let e1 = entries.choose(&mut rng).unwrap().clone();
        let e2 = entries.choose(&mut rng).unwrap().clone();
        let starred = MapGroup::star(MapGroup::alt(e1.clone(), e2.clone()));
        let split = MapGroup::concat(MapGroup::star(e1), MapGroup::star(e2));
        for m in &maps {
            pairs += 1;
            agree += (map_group_sem(&starred, m) == map_group_sem(&split, m)) as usize;
        }
    }
    verdict(
        pairs >= 1000 && agree == pairs,
        format!("{agree}/{pairs} (group, map) pairs agree over {} maps", maps.len()),
    )
}

fn elaboration_equivalence(
    schemas: &[(canon_cddl::TypeExpr, canon_cddl::elab::ElabSchema)],
    rng: &mut ChaCha8Rng,
) -> Verdict {
    let (mut total, mut agree) = (0usize, 0usize);
    for (t, es) in schemas {
        for x in gen::items_for_type(rng, t, 100) {
            total += 1;
            agree += (type_sem(t, &x) == type_sem(&es.ty, &x)) as usize;
        }
    }
    verdict(schemas.len() >= 500 && agree == total, format!("{} schemas, {agree}/{total} items agree", schemas.len()))
}

fn round_trip(schemas: &[(canon_cddl::TypeExpr, canon_cddl::elab::ElabSchema)], rng: &mut ChaCha8Rng) -> Verdict {
    let (mut values, mut values_ok) = (0usize, 0usize);
    let (mut items, mut items_ok) = (0usize, 0usize);
    for _ in 0..20 {
        if values >= 10_000 && items >= 10_000 {
            break;
        }
        for (t, es) in schemas {
            for _ in 0..4 {
                let v = gen::value_for(rng, &es.ty, 4);
                if sigma_check(es, &v).is_err() {
                    continue;
                }
                values += 1;
                let ok = to_vec(es, &v).ok().and_then(|bytes| {
                    parse(es, &bytes).ok().map(|(back, rest)| rest.is_empty() && back.normalize() == v.normalize())
                });
                values_ok += (ok == Some(true)) as usize;
            }
            for x in gen::items_for_type(rng, t, 8) {
                let bytes = encode(&x);
                let Ok((v, _)) = parse(es, &bytes) else { continue };
                items += 1;
                items_ok += (to_vec(es, &v).as_deref() == Ok(&bytes[..])) as usize;
            }
        }
    }
    verdict(
        values >= 10_000 && items >= 10_000 && values_ok == values && items_ok == items,
        format!("parse(serialize(v)) {values_ok}/{values}, serialize(parse(x)) {items_ok}/{items}"),
    )
}

fn schema(src: &str) -> canon_cddl::elab::ElabSchema {
    elaborate_schema(&parse_cddl(src).unwrap()).unwrap()
}

fn worked_examples() -> Verdict {
    let entity = schema(r#"entity = [ tstr, ("company" / "nonprofit"), { ? ("CEO": tstr), * (tstr => uint) } ]"#);
    let acme = encode(&Item::Array(vec![
        Item::text("ACME Corp."),
        Item::text("company"),
        mk_map(vec![
            (Item::text("J.D."), int(1842)),
            (Item::text("M.S."), int(1729)),
            (Item::text("CEO"), Item::text("J.D.")),
        ])
        .unwrap(),
    ]));
    let assoc = encode(&Item::Array(vec![
        Item::text("The Main St. Assoc."),
        Item::text("nonprofit"),
        mk_map(vec![(Item::text("John S."), int(0))]).unwrap(),
    ]));
    let mut failed = Vec::new();
    if validate(&entity, &acme) != Ok(acme.len()) || validate(&entity, &assoc) != Ok(assoc.len()) {
        failed.push("entity instances");
    }

    let entries = [(int(18), int(21))];
    let opt = |cut| MapGroup::opt(MapGroup::entry(TypeExpr::LitInt(18), TypeExpr::LitInt(42), cut));
    let nothing_consumed = map_group_sem(&opt(false), &entries) == MapOutcome::Set(BTreeSet::from([1]));
    let bot = map_group_sem(&opt(true), &entries) == MapOutcome::Bot;
    let m = encode(&mk_map(entries.to_vec()).unwrap());
    let arrow = schema("m = { ? 18 => 42, * uint => uint }");
    let arrow_passes = matches!(parse(&arrow, &m), Ok((Value::Pair(ref opt, _), _)) if **opt == Value::None);
    let cut = schema("m = { ? 18 : 42, * uint => uint }");
    let cut_fails = validate(&cut, &m).map_err(|e| e.kind) == Err(ValidationErrorKind::CutViolation);
    if !(nothing_consumed && bot && arrow_passes && cut_fails) {
        failed.push("{18: 21} under ?(18 => 42) / ?(18 : 42)");
    }

    let ambiguous = elaborate_schema(&parse_cddl("t = uint / any").unwrap()).map_err(|e| e.kind);
    if ambiguous != Err(ElabErrorKind::NonDisjointAlternatives) {
        failed.push("uint / any");
    }

    let key = encode(
        &mk_map(vec![
            (int(1), int(1)),
            (int(-1), int(6)),
            (int(-2), Item::bytes(&[7; 32])),
            (int(-4), Item::bytes(&[8; 32])),
            (Item::text("use"), Item::text("sig")),
        ])
        .unwrap(),
    );
    let parsed = parse_key_okp(&key);
    let key_ok = matches!(&parsed, Ok(k) if k.curve == Label::Int(6)
        && k.public == Some(&[7; 32][..])
        && k.private == Some(&[8; 32][..])
        && k.rest.iter().count() == 1);
    if !key_ok {
        failed.push("COSE_Key_OKP example");
    }
    let literal = schema("m = { 1:1 }");
    if to_vec(&literal, &Value::pair(Value::Unit, Value::Unit)).as_deref() != Ok(&[0xa1, 0x01, 0x01][..]) {
        failed.push("literal entry serialization");
    }
    verdict(
        failed.is_empty(),
        if failed.is_empty() {
            "all examples as expected".to_string()
        } else {
            format!("failed: {}", failed.join(", "))
        },
    )
}

#[cfg(feature = "ed25519")]
fn published_ed25519() -> String {
    let msg = hex::decode(concat!(
        "d28449a2012704446b696432a04e7369676e6564206d657373616765",
        "5840cc87665ffd3fa33d96f3b606fcedeaef839423221872d0bfa196e069a189a607",
        "c2284924c3abb80e942466cd300cc5d18fe4e5ea1f3ebdb62ef8419109447d03"
    ))
    .unwrap();
    let pk = hex::decode("d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a").unwrap();
    match verify1(&canon_cose::Ed25519Provider, &pk, &msg) {
        Ok(b"signed message") => "published Ed25519 example verifies".into(),
        other => format!("published Ed25519 example FAILED: {other:?}"),
    }
}

#[cfg(not(feature = "ed25519"))]
fn published_ed25519() -> String {
    "published Ed25519 example skipped: no backend".into()
}

fn cose_sign1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let p = FakeProvider;
    let protected = Headers { alg: Some(Label::Int(-8)), ..Headers::default() };
    let (mut recovered, mut rejected) = (0, 0);
    for _ in 0..1000 {
        let sk: [u8; 32] = rng.gen();
        let pk = canon_cose::CryptoProvider::public_key(&p, &sk).unwrap();
        let payload: Vec<u8> = (0..rng.gen_range(0..300)).map(|_| rng.gen()).collect();
        let msg = sign1_to_vec(&p, &sk, &protected, &Headers::default(), &payload).unwrap();
        recovered += (verify1(&p, &pk, &msg) == Ok(&payload[..])) as usize;
        let mut tampered = msg.clone();
        let i = tampered.len() - 1 - rng.gen_range(0..64);
        tampered[i] ^= 1 << rng.gen_range(0..8);
        rejected += (verify1(&p, &pk, &tampered) == Err(CoseError::SignatureInvalid)) as usize;
    }
    let published = published_ed25519();
    verdict(
        recovered == 1000 && rejected == 1000 && !published.contains("FAILED"),
        format!("recovered {recovered}/1000, tamper rejected {rejected}/1000, {published}"),
    )
}

fn workloads() -> Verdict {
    let map = bench::bench_map(8000, 1000, 5, 9);
    let map_ok = map.speedup_decode() >= 2.0;

    let es = bench::schema(bench::ARR_SCHEMA);
    let input = bench::arr_input(10_000);
    let ((valid, walked), growth) = peak_growth(|| {
        let valid = validate(&es, &input) == Ok(input.len());
        let walked = parse(&es, &input).map(|(v, _)| bench::arr_walk(&v)).ok();
        (valid, walked)
    });
    let arr_ok = valid && walked == Some((100_000_000, 0)) && growth <= 64 * 1024;
    verdict(
        map_ok && arr_ok,
        format!(
            "map early exit {:.0} ns/lookup, speedup {:.2}x vs decoding scan ({:.2}x vs byte scan); arr {} bytes, {} elements, heap growth {growth} bytes",
            map.early_exit_ns,
            map.speedup_decode(),
            map.speedup_bytes(),
            input.len(),
            walked.map_or(0, |w| w.0),
        ),
    )
}

#[test]
fn acceptance() {
    let mut results: Vec<(&str, Verdict, Duration)> = Vec::new();
    let mut timed = |name, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        let elapsed = start.elapsed();
        let line =
            format!("{} {name}: {} [{:.1}s]\n", if v.ok { "PASS" } else { "FAIL" }, v.detail, elapsed.as_secs_f64());
        // straight to the stream so the line shows without --nocapture
        let _ = std::io::stderr().write_all(line.as_bytes());
        results.push((name, v, elapsed));
    };
    timed("1 non-malleability", &mut non_malleability);
    timed("2 comparator", &mut comparator);
    timed("3 constant-stack validation", &mut constant_stack);
    timed("4 star rewrite", &mut star_rewrite);
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let schemas = gen::accepted_schemas(&mut rng, 500);
    timed("5 elaboration equivalence", &mut || elaboration_equivalence(&schemas, &mut rng));
    timed("6 round trip", &mut || round_trip(&schemas, &mut rng));
    timed("7 worked examples", &mut worked_examples);
    timed("8 COSE Sign1", &mut cose_sign1);
    timed("9 workloads", &mut workloads);

    let limits = [("1 non-malleability", 60.0), ("2 comparator", 30.0)];
    for (name, limit) in limits {
        let (_, _, t) = results.iter().find(|r| r.0 == name).unwrap();
        assert!(t.as_secs_f64() < limit, "{name} took {t:?}");
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.1.ok).map(|r| r.0).collect();
    assert!(failed.is_empty(), "failed: {failed:?}");
}

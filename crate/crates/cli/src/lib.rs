//! The `canon` command: CBOR checks, CDDL tooling, COSE_Sign1 and the
//! benchmark workloads, each printing a [`Report`].

pub mod bench;
pub mod dump;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use canon_cbor::{det_check, encode, mk_map, validate_raw, Item, ItemRef};
use canon_cddl::elab::{elaborate_schema, ElabSchema};
use canon_cddl::parse_cddl;
use canon_cddl::runtime::{parse, to_vec, validate};
use canon_cose::{parse_key_okp, sign1_to_vec, verify1, CryptoProvider, FakeProvider, Headers, Label};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::RngCore;

pub use report::{Finding, Outcome, Report};

#[derive(Debug, Parser)]
#[command(name = "canon", version, about = "Deterministic CBOR, CDDL and COSE_Sign1 tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that FILE starts with a well-formed item; report its size.
    Validate { file: PathBuf },
    /// Check that FILE starts with a deterministically encoded item.
    DetCheck { file: PathBuf },
    /// Print the leading item of FILE in diagnostic notation.
    Diag { file: PathBuf },
    #[command(subcommand)]
    Cddl(CddlCommand),
    #[command(subcommand)]
    Cose(CoseCommand),
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Debug, Subcommand)]
enum CddlCommand {
    /// Parse and elaborate a schema.
    Check { schema: PathBuf },
    /// Validate FILE against the schema's first rule.
    Validate { schema: PathBuf, file: PathBuf },
    /// Parse FILE and print the value dump.
    Parse {
        schema: PathBuf,
        file: PathBuf,
        /// Write the dump here instead of after the report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serialize a value dump to canonical bytes.
    Serialize {
        schema: PathBuf,
        value: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum CoseCommand {
    /// Write a COSE_Key_OKP file holding a secret and its public key.
    Keygen {
        #[arg(long)]
        out: PathBuf,
        /// 32-byte secret in hex; random when absent.
        #[arg(long)]
        secret: Option<String>,
        #[arg(long, value_enum, default_value_t = Provider::Ed25519)]
        provider: Provider,
    },
    #[command(subcommand)]
    Sign1(Sign1Command),
}

#[derive(Debug, Subcommand)]
enum Sign1Command {
    /// Sign a payload into a tagged COSE_Sign1 message.
    Sign {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        payload: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Key id for the unprotected headers, in hex.
        #[arg(long)]
        kid: Option<String>,
        #[arg(long, value_enum, default_value_t = Provider::Ed25519)]
        provider: Provider,
    },
    /// Verify a tagged COSE_Sign1 message.
    Verify {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        message: PathBuf,
        /// Write the verified payload here.
        #[arg(long)]
        payload_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Provider::Ed25519)]
        provider: Provider,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Provider {
    Ed25519,
    /// Hash-based stand-in; offers no security.
    Fake,
}

impl Provider {
    #[cfg_attr(feature = "ed25519", allow(unused_variables))]
    fn get(self, r: &Report) -> Step<&'static dyn CryptoProvider> {
        match self {
            #[cfg(feature = "ed25519")]
            Provider::Ed25519 => Ok(&canon_cose::Ed25519Provider),
            #[cfg(not(feature = "ed25519"))]
            Provider::Ed25519 => {
                let mut r = r.clone();
                r.usage("Unsupported", "built without the ed25519 feature");
                Err(r)
            }
            Provider::Fake => Ok(&FakeProvider),
        }
    }

    /// COSE curve identifier written to key files.
    fn curve(self) -> i64 {
        match self {
            Provider::Ed25519 => 6,
            Provider::Fake => -65536,
        }
    }
}

#[derive(Debug, Args)]
struct BenchOpts {
    /// Timed runs per measurement; overrides the environment.
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl BenchOpts {
    fn iters(&self) -> usize {
        self.iters.filter(|&n| n > 0).unwrap_or_else(bench::iters_from_env)
    }
}

#[derive(Debug, Subcommand)]
enum BenchCommand {
    /// Parse and serialize 8-field records.
    Rec {
        #[arg(long, default_value_t = 10_000)]
        records: usize,
        #[command(flatten)]
        opts: BenchOpts,
    },
    /// Look up absent keys in a map of random integers.
    Map {
        #[arg(long, default_value_t = 8000)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        k: usize,
        #[command(flatten)]
        opts: BenchOpts,
    },
    /// Validate, walk and serialize an n-by-n array of arrays.
    Arr {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[command(flatten)]
        opts: BenchOpts,
    },
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> Report
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => dispatch(cli.command),
        Err(e) => {
            let mut r = Report::new("canon");
            match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    r.body = Some(e.to_string());
                }
                _ => {
                    r.usage("Usage", e.kind());
                    r.body = Some(e.to_string());
                }
            }
            r
        }
    }
}

type Step<T> = Result<T, Report>;

fn read(r: &Report, path: &Path) -> Step<Vec<u8>> {
    std::fs::read(path).map_err(|e| {
        let mut r = r.clone();
        r.usage("Io", format!("{}: {e}", path.display()));
        r
    })
}

fn write(r: &Report, path: &Path, bytes: &[u8]) -> Step<()> {
    std::fs::write(path, bytes).map_err(|e| {
        let mut r = r.clone();
        r.usage("Io", format!("{}: {e}", path.display()));
        r
    })
}

fn text(r: &Report, path: &Path) -> Step<String> {
    let bytes = read(r, path)?;
    String::from_utf8(bytes).map_err(|_| {
        let mut r = r.clone();
        r.reject("InvalidUtf8", "-", format!("{} is not UTF-8", path.display()));
        r
    })
}

fn rejected(r: &Report, code: &str, path: &str, message: impl std::fmt::Display) -> Report {
    let mut r = r.clone();
    r.reject(code, path, message);
    r
}

fn hex_arg(r: &Report, what: &str, s: &str) -> Step<Vec<u8>> {
    hex::decode(s).map_err(|e| {
        let mut r = r.clone();
        r.usage("BadHex", format!("{what}: {e}"));
        r
    })
}

fn dispatch(cmd: Command) -> Report {
    let name = match &cmd {
        Command::Validate { .. } => "validate",
        Command::DetCheck { .. } => "det-check",
        Command::Diag { .. } => "diag",
        Command::Cddl(c) => match c {
            CddlCommand::Check { .. } => "cddl check",
            CddlCommand::Validate { .. } => "cddl validate",
            CddlCommand::Parse { .. } => "cddl parse",
            CddlCommand::Serialize { .. } => "cddl serialize",
        },
        Command::Cose(CoseCommand::Keygen { .. }) => "cose keygen",
        Command::Cose(CoseCommand::Sign1(Sign1Command::Sign { .. })) => "cose sign1 sign",
        Command::Cose(CoseCommand::Sign1(Sign1Command::Verify { .. })) => "cose sign1 verify",
        Command::Bench(BenchCommand::Rec { .. }) => "bench rec",
        Command::Bench(BenchCommand::Map { .. }) => "bench map",
        Command::Bench(BenchCommand::Arr { .. }) => "bench arr",
    };
    let mut r = Report::new(name);
    let step = match cmd {
        Command::Validate { file } => cbor_check(&mut r, &file, validate_raw),
        Command::DetCheck { file } => cbor_check(&mut r, &file, det_check),
        Command::Diag { file } => diag(&mut r, &file),
        Command::Cddl(c) => cddl(&mut r, c),
        Command::Cose(c) => cose(&mut r, c),
        Command::Bench(c) => {
            run_bench(&mut r, c);
            Ok(())
        }
    };
    match step {
        Ok(()) => r,
        Err(failed) => failed,
    }
}

fn cbor_check(r: &mut Report, file: &Path, check: fn(&[u8]) -> canon_cbor::Result<usize>) -> Step<()> {
    let input = read(r, file)?;
    match check(&input) {
        Ok(n) => {
            r.field("size", n).field("trailing", input.len() - n);
            Ok(())
        }
        Err(e) => Err(rejected(r, e.code(), "$", e)),
    }
}

fn diag(r: &mut Report, file: &Path) -> Step<()> {
    let input = read(r, file)?;
    let (item, rest) = ItemRef::parse(&input).map_err(|e| rejected(r, e.code(), "$", e))?;
    r.field("size", item.len()).field("trailing", rest.len()).field("diag", canon_cbor::diag::to_diag(item));
    Ok(())
}

fn load_schema(r: &Report, path: &Path) -> Step<ElabSchema> {
    let src = text(r, path)?;
    let schema =
        parse_cddl(&src).map_err(|e| rejected(r, e.kind.code(), &format!("{}:{}", e.line, e.col), e.message))?;
    elaborate_schema(&schema).map_err(|e| rejected(r, e.kind.code(), &e.path, e.detail))
}

fn cddl(r: &mut Report, cmd: CddlCommand) -> Step<()> {
    match cmd {
        CddlCommand::Check { schema } => {
            let es = load_schema(r, &schema)?;
            r.field("shape", &es.shape).field("type", &es.ty);
            for note in &es.notes {
                r.field("note", note);
            }
        }
        CddlCommand::Validate { schema, file } => {
            let es = load_schema(r, &schema)?;
            let input = read(r, &file)?;
            let n = validate(&es, &input).map_err(|e| rejected(r, e.kind.code(), &e.path, &e))?;
            r.field("size", n).field("trailing", input.len() - n);
        }
        CddlCommand::Parse { schema, file, out } => {
            let es = load_schema(r, &schema)?;
            let input = read(r, &file)?;
            let (v, rest) = parse(&es, &input).map_err(|e| rejected(r, e.kind.code(), &e.path, &e))?;
            r.field("size", input.len() - rest.len()).field("trailing", rest.len());
            let text = dump::to_text(&v);
            match out {
                Some(path) => {
                    write(r, &path, text.as_bytes())?;
                    r.field("out", path.display());
                }
                None => r.body = Some(text),
            }
        }
        CddlCommand::Serialize { schema, value, out } => {
            let es = load_schema(r, &schema)?;
            let v = dump::read_value(&text(r, &value)?)
                .map_err(|e| rejected(r, "DumpSyntax", &format!("{}:1", e.line), &e.message))?;
            let bytes = to_vec(&es, &v).map_err(|e| match e {
                canon_cddl::runtime::SerError::Sigma(reason) => rejected(r, reason.code(), "$", e),
                canon_cddl::runtime::SerError::BufferTooSmall => rejected(r, "BufferTooSmall", "$", e),
            })?;
            write(r, &out, &bytes)?;
            r.field("size", bytes.len()).field("out", out.display());
        }
    }
    Ok(())
}

struct KeyPair {
    public: Vec<u8>,
    secret: Option<Vec<u8>>,
}

fn load_key(r: &Report, path: &Path, cp: &dyn CryptoProvider) -> Step<KeyPair> {
    let bytes = read(r, path)?;
    let key = parse_key_okp(&bytes).map_err(|e| rejected(r, e.code(), "$", &e))?;
    let secret = key.private.map(<[u8]>::to_vec);
    let public = match (key.public, &secret) {
        (Some(x), _) => x.to_vec(),
        (None, Some(d)) => cp.public_key(d).map_err(|e| rejected(r, e.code(), "$", &e))?.to_vec(),
        (None, None) => return Err(rejected(r, "BadKey", "$", "key has neither -2 nor -4")),
    };
    Ok(KeyPair { public, secret })
}

fn cose(r: &mut Report, cmd: CoseCommand) -> Step<()> {
    match cmd {
        CoseCommand::Keygen { out, secret, provider } => {
            let cp = provider.get(r)?;
            let secret = match secret {
                Some(s) => hex_arg(r, "secret", &s)?,
                None => {
                    let mut s = vec![0u8; 32];
                    rand::thread_rng().fill_bytes(&mut s);
                    s
                }
            };
            let public = cp.public_key(&secret).map_err(|e| rejected(r, e.code(), "-", &e))?;
            let key = mk_map(vec![
                (Item::UInt(1), Item::UInt(1)),
                (Item::int(-1).expect("small"), Item::int(provider.curve().into()).expect("small")),
                (Item::int(-2).expect("small"), Item::bytes(&public)),
                (Item::int(-4).expect("small"), Item::bytes(&secret)),
            ])
            .expect("distinct labels");
            write(r, &out, &encode(&key))?;
            r.field("public", hex::encode(public)).field("out", out.display());
        }
        CoseCommand::Sign1(Sign1Command::Sign { key, payload, out, kid, provider }) => {
            let cp = provider.get(r)?;
            let pair = load_key(r, &key, cp)?;
            let Some(secret) = pair.secret else {
                return Err(rejected(r, "BadKey", "$", "key has no secret (-4)"));
            };
            let payload = read(r, &payload)?;
            let protected = Headers { alg: Some(Label::Int(-8)), ..Headers::default() };
            let unprotected = Headers { kid: kid.map(|k| hex_arg(r, "kid", &k)).transpose()?, ..Headers::default() };
            let msg = sign1_to_vec(cp, &secret, &protected, &unprotected, &payload)
                .map_err(|e| rejected(r, e.code(), "$", &e))?;
            write(r, &out, &msg)?;
            r.field("size", msg.len()).field("out", out.display());
        }
        CoseCommand::Sign1(Sign1Command::Verify { key, message, payload_out, provider }) => {
            let cp = provider.get(r)?;
            let pair = load_key(r, &key, cp)?;
            let msg = read(r, &message)?;
            let payload = verify1(cp, &pair.public, &msg).map_err(|e| rejected(r, e.code(), "$", &e))?;
            r.field("payload_size", payload.len());
            if let Some(path) = payload_out {
                write(r, &path, payload)?;
                r.field("out", path.display());
            }
        }
    }
    Ok(())
}

fn run_bench(r: &mut Report, cmd: BenchCommand) {
    match cmd {
        BenchCommand::Rec { records, opts } => {
            let iters = opts.iters();
            let x = bench::bench_rec(records, iters, opts.seed);
            r.field("records", x.records)
                .field("iters", iters)
                .field("parse_ns_per_record", format!("{:.1}", x.parse_ns))
                .field("serialize_ns_per_record", format!("{:.1}", x.serialize_ns));
        }
        BenchCommand::Map { n, k, opts } => {
            let iters = opts.iters();
            let x = bench::bench_map(n, k, iters, opts.seed);
            r.field("entries", x.entries)
                .field("lookups", x.lookups)
                .field("iters", iters)
                .field("validate_ns", format!("{:.0}", x.validate_ns))
                .field("early_exit_ns_per_lookup", format!("{:.1}", x.early_exit_ns))
                .field("linear_bytes_ns_per_lookup", format!("{:.1}", x.linear_bytes_ns))
                .field("linear_decode_ns_per_lookup", format!("{:.1}", x.linear_decode_ns))
                .field("hit_ns_per_lookup", format!("{:.1}", x.hit_ns))
                .field("speedup_vs_linear_bytes", format!("{:.2}", x.speedup_bytes()))
                .field("speedup_vs_linear_decode", format!("{:.2}", x.speedup_decode()));
        }
        BenchCommand::Arr { n, opts } => {
            let iters = opts.iters();
            let x = bench::bench_arr(n, iters);
            r.field("n", x.n)
                .field("iters", iters)
                .field("input_bytes", x.input_bytes)
                .field("elements", x.elements)
                .field("zero_copy", x.zero_copy)
                .field("validate_ns", format!("{:.0}", x.validate_ns))
                .field("iterate_ns", format!("{:.0}", x.iterate_ns))
                .field("serialize_ns", format!("{:.0}", x.serialize_ns));
        }
    }
}

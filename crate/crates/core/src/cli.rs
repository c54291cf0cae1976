//! Operator front-end: `params`, `setup`, `tx`, `verify`, `balance`, `bench`, `vectors`.
//!
//! Exit codes: 0 success, 2 validation error, 3 verification failure, 4 I/O error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use serde_json::json;

use crate::commit::{commit_tx, keygen, PublicParams, SecretKey};
use crate::ledger::store::{self, StoreError};
use crate::ledger::{CreateOptions, Ledger, LedgerConfig, LedgerError, ValueList};
use crate::params::ParamSet;
use crate::sampling::{chi_polys, sample_challenge};
use crate::transcript::digest;
use crate::zkp::instance::Instance;
use crate::zkp::{ProofKind, ProveOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "pqetl", version, about = "Post-quantum confidential multi-asset ledger")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Parameter set: `paper`, `desk`, or a TOML file.
    #[arg(long, global = true, default_value = "desk")]
    pub params: String,
    /// Ledger file.
    #[arg(long, global = true, default_value = "ledger.pqetl")]
    pub ledger: PathBuf,
    /// Seed: 64 hex digits, or any other string (hashed). Random when omitted.
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print and validate a parameter set.
    Params,
    /// Create a ledger with a genesis row and one key file per participant.
    Setup {
        /// Number of participants.
        #[arg(long)]
        parties: usize,
        /// Number of assets.
        #[arg(long, default_value_t = 1)]
        assets: usize,
        /// Comma-separated genesis amounts, asset-major (`assets * parties` values).
        #[arg(long, allow_hyphen_values = true)]
        genesis: String,
        /// One commitment per participant holding all assets.
        #[arg(long)]
        compact: bool,
        /// Directory for key files (default: next to the ledger).
        #[arg(long)]
        keys_dir: Option<PathBuf>,
    },
    /// Build, verify and append a transaction.
    Tx {
        /// Comma-separated amounts, asset-major (`assets * parties` values).
        #[arg(long, allow_hyphen_values = true, conflicts_with = "transfer")]
        values: Option<String>,
        /// `ASSET:FROM:TO:AMOUNT`.
        #[arg(long)]
        transfer: Option<String>,
        /// Key files of the participants (spenders need theirs).
        #[arg(long = "key")]
        keys: Vec<PathBuf>,
        /// Build even if unbalanced or overspending (verification still applies).
        #[arg(long)]
        force: bool,
    },
    /// Re-verify every key proof and transaction of the ledger.
    Verify,
    /// Decrypt a participant's balance.
    Balance {
        /// Key file of the participant.
        #[arg(long)]
        key: PathBuf,
        /// Asset index.
        #[arg(long, default_value_t = 0)]
        asset: usize,
    },
    /// Mean prove and verify time per proof kind.
    Bench {
        /// Proof kind name (`PoB`, `PoC`, ...) or `all`.
        #[arg(long, default_value = "all")]
        kind: String,
        /// Runs per proof kind.
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
    /// Emit deterministic test vectors for the parameter set and seed.
    Vectors,
}

/// Command failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn validation(m: impl ToString) -> Self {
        CliError { code: EXIT_VALIDATION, message: m.to_string() }
    }
    fn verify(m: impl ToString) -> Self {
        CliError { code: EXIT_VERIFY, message: m.to_string() }
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        let code = match &e {
            StoreError::Io { .. } | StoreError::Exists(_) => EXIT_IO,
            StoreError::Corrupt { .. } => EXIT_VERIFY,
            StoreError::Ledger(_) | StoreError::Key { .. } => EXIT_VALIDATION,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<LedgerError> for CliError {
    fn from(e: LedgerError) -> Self {
        match e {
            LedgerError::Rejected(f) => CliError::verify(format!("verification failed: {f}")),
            e => CliError::validation(e),
        }
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match run(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            if cli.global.json {
                let _ = writeln!(err, "{}", json!({ "error": e.message, "code": e.code }));
            } else {
                let _ = writeln!(err, "error: {}", e.message);
            }
            e.code
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let g = &cli.global;
    let params = ParamSet::resolve(&g.params).map_err(CliError::validation)?;
    let emit = |out: &mut dyn Write, human: String, value: serde_json::Value| -> Result<(), CliError> {
        let text = if g.json { value.to_string() } else { human };
        writeln!(out, "{text}").map_err(|e| CliError { code: EXIT_IO, message: e.to_string() })
    };
    match &cli.cmd {
        Command::Params => {
            let human = format!("{params}\n{}", params.to_toml());
            let value = json!({
                "name": params.name, "d": params.d, "l": params.l, "kappa": params.kappa,
                "lambda": params.lambda, "omega": params.omega, "q": params.q.to_string(),
                "log2_q": params.q.bits(), "value_bits": params.value_bits, "beta_bits": params.beta_bits,
            });
            emit(out, human, value)
        }
        Command::Setup { parties, assets, genesis, compact, keys_dir } => {
            let vals = parse_values(genesis, *assets, *parties)?;
            let seed = seed_bytes(g.seed.as_deref());
            let config = LedgerConfig { assets: *assets, compact: *compact };
            let (ledger, sks) = Ledger::setup(&params, config, &vals, seed)?;
            store::create(&g.ledger, &ledger)?;
            let dir = keys_dir.clone().unwrap_or_else(|| g.ledger.parent().map(Path::to_path_buf).unwrap_or_default());
            let mut files = Vec::new();
            for (i, sk) in sks.iter().enumerate() {
                let p = key_path(&dir, &g.ledger, i);
                store::write_keyfile(&p, &ledger, i, sk)?;
                files.push(p.display().to_string());
            }
            let human = format!(
                "ledger {} created ({} participants, {} assets{})\n{}",
                g.ledger.display(),
                parties,
                assets,
                if *compact { ", compact" } else { "" },
                files.iter().enumerate().map(|(i, f)| format!("participant {i}: {f}")).collect::<Vec<_>>().join("\n")
            );
            let value = json!({ "ledger": g.ledger.display().to_string(), "id": hex::encode(ledger.id()), "keyfiles": files });
            emit(out, human, value)
        }
        Command::Tx { values, transfer, keys, force } => {
            let mut ledger = store::load(&g.ledger)?;
            let (a, n) = (ledger.config.assets, ledger.parties());
            let vals = match (values, transfer) {
                (Some(v), None) => parse_values(v, a, n)?,
                (None, Some(t)) => parse_transfer(t, a, n)?,
                _ => return Err(CliError::validation("give exactly one of --values or --transfer")),
            };
            let mut sks: Vec<Option<SecretKey>> = vec![None; n];
            for k in keys {
                let (i, sk) = store::read_keyfile(k, &ledger)?;
                sks[i] = Some(sk);
            }
            let refs: Vec<Option<&SecretKey>> = sks.iter().map(Option::as_ref).collect();
            let mut rng = ChaCha20Rng::from_seed(seed_bytes(g.seed.as_deref()));
            let opts = CreateOptions { force: *force, ..Default::default() };
            let (tx, timings) = ledger.create_tx(&vals, &refs, &mut rng, &opts)?;
            let t = Instant::now();
            let index = ledger.append(tx)?;
            let verify_ms = ms(t.elapsed());
            store::append_tx(&g.ledger, &ledger.pp, ledger.txs.last().expect("just appended"))?;
            let rows: Vec<_> = timings
                .iter()
                .map(|(role, (count, d))| json!({ "proof": role.name(), "count": count, "total_ms": ms(*d) }))
                .collect();
            let human = format!(
                "appended transaction {index}\n{}\nverify: {verify_ms:.1} ms",
                timings
                    .iter()
                    .map(|(r, (c, d))| format!("{:>9}: {c:>3} proofs, {:.1} ms", r.name(), ms(*d)))
                    .collect::<Vec<_>>()
                    .join("\n")
            );
            emit(out, human, json!({ "index": index, "prove": rows, "verify_ms": verify_ms }))
        }
        Command::Verify => {
            let ledger = store::load(&g.ledger)?;
            match ledger.verify_all() {
                Ok(()) => {
                    let human = format!("ok: {} key proofs, {} transactions verified", ledger.parties(), ledger.len());
                    emit(out, human, json!({ "ok": true, "transactions": ledger.len() }))
                }
                Err((k, f)) => Err(CliError::verify(format!("transaction {k}: {f}"))),
            }
        }
        Command::Balance { key, asset } => {
            let ledger = store::load(&g.ledger)?;
            let (i, sk) = store::read_keyfile(key, &ledger)?;
            let b = ledger.check_balance(&sk, i, *asset)?;
            emit(out, b.to_string(), json!({ "participant": i, "asset": asset, "balance": b.to_string() }))
        }
        Command::Bench { kind, n } => {
            let kinds: Vec<ProofKind> = if kind == "all" {
                ProofKind::ALL.to_vec()
            } else {
                let k = ProofKind::ALL.iter().find(|k| k.name().eq_ignore_ascii_case(kind));
                vec![*k.ok_or_else(|| CliError::validation(format!("unknown proof kind {kind}")))?]
            };
            let rows = bench(&params, &kinds, (*n).max(1), seed_bytes(g.seed.as_deref()))?;
            let mut human = format!("{params}\n{:<6} {:>12} {:>12} {:>10}", "kind", "prove ms", "verify ms", "bytes");
            for r in &rows {
                human.push_str(&format!("\n{:<6} {:>12.2} {:>12.2} {:>10}", r.kind, r.prove_ms, r.verify_ms, r.bytes));
            }
            emit(out, human, serde_json::to_value(&rows).expect("rows serialize"))
        }
        Command::Vectors => {
            let v = vectors(&params, seed_bytes(Some(g.seed.as_deref().unwrap_or("vectors"))))?;
            emit(out, serde_json::to_string_pretty(&v).expect("vectors serialize"), v)
        }
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn key_path(dir: &Path, ledger: &Path, i: usize) -> PathBuf {
    let stem = ledger.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "ledger".into());
    dir.join(format!("{stem}.p{i}.key"))
}

/// 64 hex digits are used as is; anything else is hashed. `None` draws from the OS.
pub fn seed_bytes(s: Option<&str>) -> [u8; 32] {
    match s {
        Some(h) if h.len() == 64 => match hex::decode(h) {
            Ok(b) => b.try_into().expect("32 bytes"),
            Err(_) => digest("pqetl/cli-seed", h.as_bytes()),
        },
        Some(s) => digest("pqetl/cli-seed", s.as_bytes()),
        None => {
            let mut b = [0u8; 32];
            rand::rng().fill_bytes(&mut b);
            b
        }
    }
}

/// Comma-separated asset-major amounts.
pub fn parse_values(s: &str, assets: usize, parties: usize) -> Result<ValueList, CliError> {
    let flat: Vec<i128> = s
        .split(',')
        .map(|x| x.trim().parse::<i128>().map_err(|e| CliError::validation(format!("bad amount {x:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    if flat.len() != assets * parties {
        return Err(CliError::validation(format!(
            "expected {} amounts ({assets} assets x {parties} participants), got {}",
            assets * parties,
            flat.len()
        )));
    }
    Ok(ValueList(flat.chunks(parties).map(<[i128]>::to_vec).collect()))
}

/// `ASSET:FROM:TO:AMOUNT`.
pub fn parse_transfer(s: &str, assets: usize, parties: usize) -> Result<ValueList, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::validation(format!("bad transfer {s:?}, want ASSET:FROM:TO:AMOUNT"));
    if parts.len() != 4 {
        return Err(bad());
    }
    let idx = |x: &str| x.parse::<usize>().map_err(|_| bad());
    let (a, from, to) = (idx(parts[0])?, idx(parts[1])?, idx(parts[2])?);
    let amount: i128 = parts[3].parse().map_err(|_| bad())?;
    if a >= assets || from >= parties || to >= parties || from == to || amount <= 0 {
        return Err(bad());
    }
    Ok(ValueList::transfer(assets, parties, a, from, to, amount))
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub kind: &'static str,
    pub runs: usize,
    pub prove_ms: f64,
    pub verify_ms: f64,
    pub bytes: usize,
}

/// Runs each proof kind `n` times on fresh honest statements and reports
/// mean prove and verify times.
pub fn bench(params: &ParamSet, kinds: &[ProofKind], n: usize, seed: [u8; 32]) -> Result<Vec<BenchRow>, CliError> {
    let pp = PublicParams::expand(params, seed).map_err(CliError::validation)?;
    let mut rng = ChaCha20Rng::from_seed(digest("pqetl/bench", &seed));
    let (sk, pk) = keygen(&pp, &mut rng);
    let opts = ProveOptions::default();
    let mut rows = Vec::new();
    for &kind in kinds {
        let (mut tp, mut tv, mut bytes) = (Duration::ZERO, Duration::ZERO, 0);
        for _ in 0..n {
            let inst = Instance::honest(&pp, kind, &sk, &pk, &mut rng);
            let t0 = Instant::now();
            let pf = inst.prove(&pp, &mut rng, &opts).map_err(CliError::verify)?;
            let t1 = Instant::now();
            inst.verify(&pp, &pf).map_err(CliError::verify)?;
            tv += t1.elapsed();
            tp += t1 - t0;
            bytes = pf.encode(&pp).len();
        }
        rows.push(BenchRow {
            kind: kind.name(),
            runs: n,
            prove_ms: ms(tp) / n as f64,
            verify_ms: ms(tv) / n as f64,
            bytes,
        });
    }
    Ok(rows)
}

/// Deterministic vectors: ring products, a challenge, a key pair and a
/// commitment, all derived from `seed`.
pub fn vectors(params: &ParamSet, seed: [u8; 32]) -> Result<serde_json::Value, CliError> {
    let pp = PublicParams::expand(params, seed).map_err(CliError::validation)?;
    let ring = &pp.ring;
    let mut rng = ChaCha20Rng::from_seed(digest("pqetl/vectors", &seed));
    let a = crate::sampling::uniform_poly(ring, &mut rng);
    let b = crate::sampling::uniform_poly(ring, &mut rng);
    let c = sample_challenge(&mut rng, params.d, params.omega);
    let (sk, pk) = keygen(&pp, &mut rng);
    let r = chi_polys(ring, &mut rng, params.n_rand());
    let com = commit_tx(&pp, &pk, &ring.constant(42), &r).expect("dimensions");
    let hexp = |p: &crate::ring::Poly| {
        let mut out = Vec::new();
        crate::wire::put_poly_raw(&mut out, ring, p);
        hex::encode(out)
    };
    Ok(json!({
        "params": params.name,
        "q": params.q.to_string(),
        "seed": hex::encode(seed),
        "ring_mul": { "a": hexp(&a), "b": hexp(&b), "a_times_b": hexp(&ring.mul(&a, &b)) },
        "challenge": c.coeffs,
        "secret_key": hex::encode(sk.encode(ring)),
        "public_key": hex::encode(pk.encode(ring)),
        "commitment_value": 42,
        "commitment": hex::encode(com.encode(ring)),
        "ledger_header_sha3": hex::encode(digest("pqetl/vectors-header", &store::header_bytes(&pp, &LedgerConfig { assets: 1, compact: false }))),
    }))
}

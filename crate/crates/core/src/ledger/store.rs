//! On-disk ledger and key files.
//!
//! The ledger file is append-only: a sequence of records, each a u64
//! little-endian length followed by a payload whose first byte is a tag.
//!
//! | tag | record |
//! |-----|--------|
//! | 1 | header: magic, version, parameter TOML, seed, asset count, compact flag |
//! | 2 | participants: public keys and key proofs |
//! | 3 | genesis row |
//! | 4 | transaction |
//!
//! A sidecar `<ledger>.idx` holds the u64 byte offset of every record; it is
//! rebuilt from the ledger file when missing or stale.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Ledger, LedgerConfig, LedgerError, Participant, Transaction};
use crate::commit::{Commitment, PublicKey, PublicParams, SecretKey};
use crate::params::ParamSet;
use crate::wire::{self, Reader, WireError};
use crate::zkp::eq::EqProof;
use crate::zkp::ProofKind;

const MAGIC: &[u8; 5] = b"PQETL";
const VERSION: u8 = 1;
const TAG_HEADER: u8 = 1;
const TAG_PARTICIPANTS: u8 = 2;
const TAG_GENESIS: u8 = 3;
const TAG_TX: u8 = 4;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("record {record}: {reason}")]
    Corrupt { record: usize, reason: String },
    #[error("{0} already exists")]
    Exists(PathBuf),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("key file {path}: {reason}")]
    Key { path: PathBuf, reason: String },
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

fn corrupt(record: usize, reason: impl ToString) -> StoreError {
    StoreError::Corrupt { record, reason: reason.to_string() }
}

pub fn index_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".idx");
    PathBuf::from(p)
}

/// Header record payload; identical for identical parameters, seed and shape.
pub fn header_bytes(pp: &PublicParams, config: &LedgerConfig) -> Vec<u8> {
    let mut out = vec![TAG_HEADER];
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    wire::put_bytes(&mut out, pp.params.to_toml().as_bytes());
    out.extend_from_slice(&pp.seed);
    wire::put_u32(&mut out, config.assets as u32);
    out.push(config.compact as u8);
    out
}

fn participants_bytes(l: &Ledger) -> Vec<u8> {
    let ring = &l.pp.ring;
    let mut out = vec![TAG_PARTICIPANTS];
    wire::put_u32(&mut out, l.participants.len() as u32);
    for p in &l.participants {
        out.extend_from_slice(&p.pk.encode(ring));
        wire::put_bytes(&mut out, &p.pokw.encode(&l.pp));
    }
    out
}

fn genesis_bytes(l: &Ledger) -> Vec<u8> {
    let ring = &l.pp.ring;
    let mut out = vec![TAG_GENESIS];
    for lane in &l.table[0] {
        for c in lane {
            c.write(&mut out, ring);
        }
    }
    out
}

fn tx_bytes(pp: &PublicParams, tx: &Transaction) -> Vec<u8> {
    let mut out = vec![TAG_TX];
    out.extend_from_slice(&tx.encode(pp));
    out
}

fn frame(payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(payload.len() + 8);
    wire::put_u64(&mut out, payload.len() as u64);
    out.extend_from_slice(payload);
    out
}

/// Writes a new ledger file (and index) holding the header, participants and
/// genesis row plus any transactions already in `l`.
pub fn create(path: &Path, l: &Ledger) -> Result<(), StoreError> {
    if path.exists() {
        return Err(StoreError::Exists(path.to_path_buf()));
    }
    let mut records = vec![header_bytes(&l.pp, &l.config), participants_bytes(l), genesis_bytes(l)];
    records.extend(l.txs.iter().map(|tx| tx_bytes(&l.pp, tx)));
    let mut data = Vec::new();
    let mut idx = Vec::new();
    for r in &records {
        wire::put_u64(&mut idx, data.len() as u64);
        data.extend_from_slice(&frame(r));
    }
    let mut f = OpenOptions::new().write(true).create_new(true).open(path).map_err(io_err(path))?;
    f.write_all(&data).and_then(|_| f.sync_all()).map_err(io_err(path))?;
    let ip = index_path(path);
    fs::write(&ip, idx).map_err(io_err(&ip))
}

/// Appends one transaction record. The caller must have verified `tx`
/// against the ledger loaded from `path`.
pub fn append_tx(path: &Path, pp: &PublicParams, tx: &Transaction) -> Result<(), StoreError> {
    let mut f = OpenOptions::new().append(true).open(path).map_err(io_err(path))?;
    let offset = f.metadata().map_err(io_err(path))?.len();
    f.write_all(&frame(&tx_bytes(pp, tx))).and_then(|_| f.sync_all()).map_err(io_err(path))?;
    let ip = index_path(path);
    let mut i = OpenOptions::new().append(true).create(true).open(&ip).map_err(io_err(&ip))?;
    i.write_all(&offset.to_le_bytes()).map_err(io_err(&ip))
}

/// Splits the file into record payloads with their offsets.
fn records(data: &[u8]) -> Result<Vec<(u64, &[u8])>, StoreError> {
    let mut out = Vec::new();
    let mut pos = 0usize;
    while pos < data.len() {
        let k = out.len();
        let len = data
            .get(pos..pos + 8)
            .map(|b| u64::from_le_bytes(b.try_into().expect("8 bytes")))
            .ok_or_else(|| corrupt(k, "truncated length prefix"))?;
        let start = pos + 8;
        let end = usize::try_from(len).ok().and_then(|l| start.checked_add(l)).filter(|&e| e <= data.len());
        let end = end.ok_or_else(|| corrupt(k, "truncated record"))?;
        if start == end {
            return Err(corrupt(k, "empty record"));
        }
        out.push((pos as u64, &data[start..end]));
        pos = end;
    }
    Ok(out)
}

/// Loads a ledger, replaying stored transactions without re-verifying them
/// (use [`Ledger::verify_all`] for that). Repairs a stale index.
pub fn load(path: &Path) -> Result<Ledger, StoreError> {
    let mut data = Vec::new();
    File::open(path).and_then(|mut f| f.read_to_end(&mut data)).map_err(io_err(path))?;
    let recs = records(&data)?;
    if recs.len() < 3 {
        return Err(corrupt(recs.len(), "missing header, participant or genesis record"));
    }
    let tag = |k: usize, want: u8| {
        if recs[k].1[0] == want {
            Ok(&recs[k].1[1..])
        } else {
            Err(corrupt(k, format!("expected record tag {want}, found {}", recs[k].1[0])))
        }
    };
    let wire_err = |k: usize| move |e: WireError| corrupt(k, e);

    // header
    let mut r = Reader::new(tag(0, TAG_HEADER)?);
    let magic = r.take(MAGIC.len()).map_err(wire_err(0))?;
    if magic != MAGIC {
        return Err(corrupt(0, "not a ledger file"));
    }
    r.expect_u8("ledger version", VERSION).map_err(wire_err(0))?;
    let toml = std::str::from_utf8(r.bytes().map_err(wire_err(0))?).map_err(|e| corrupt(0, e))?;
    let params = ParamSet::from_toml(toml).map_err(|e| corrupt(0, e))?;
    let seed = r.array32().map_err(wire_err(0))?;
    let assets = r.u32().map_err(wire_err(0))? as usize;
    let compact = match r.u8().map_err(wire_err(0))? {
        0 => false,
        1 => true,
        x => return Err(corrupt(0, format!("bad compact flag {x}"))),
    };
    r.finish().map_err(wire_err(0))?;
    let pp = PublicParams::expand(&params, seed).map_err(|e| corrupt(0, e))?;
    let config = LedgerConfig { assets, compact };
    let ring = &pp.ring;

    // participants
    let mut r = Reader::new(tag(1, TAG_PARTICIPANTS)?);
    let n = r.u32().map_err(wire_err(1))? as usize;
    if n == 0 || n > 1 << 16 {
        return Err(corrupt(1, format!("bad participant count {n}")));
    }
    let mut participants = Vec::with_capacity(n);
    for _ in 0..n {
        let pk = PublicKey::read(&mut r, ring, &pp.params).map_err(wire_err(1))?;
        let pokw = EqProof::decode(&pp, ProofKind::PoKW, r.bytes().map_err(wire_err(1))?).map_err(|e| corrupt(1, e))?;
        participants.push(Participant { pk, pokw });
    }
    r.finish().map_err(wire_err(1))?;

    // genesis
    let lanes = if compact { 1 } else { assets };
    let mut r = Reader::new(tag(2, TAG_GENESIS)?);
    let mut genesis = Vec::with_capacity(lanes);
    for _ in 0..lanes {
        let row: Result<Vec<Commitment>, _> = (0..n).map(|_| Commitment::read(&mut r, ring, pp.params.kappa)).collect();
        genesis.push(row.map_err(wire_err(2))?);
    }
    r.finish().map_err(wire_err(2))?;

    let mut ledger = Ledger::from_parts(pp, config, participants, genesis)?;
    for (k, (_, payload)) in recs.iter().enumerate().skip(3) {
        let body = tag(k, TAG_TX)?;
        let tx = Transaction::decode(&ledger.pp, body).map_err(|e| corrupt(k, e))?;
        let shape_ok = tx.lanes.len() == lanes && tx.lanes.iter().all(|l| l.cells.len() == n);
        if !shape_ok || payload.is_empty() {
            return Err(corrupt(k, "transaction shape does not match the ledger"));
        }
        ledger.apply(tx);
    }

    // index sidecar
    let want: Vec<u8> = recs.iter().flat_map(|(o, _)| o.to_le_bytes()).collect();
    let ip = index_path(path);
    if fs::read(&ip).ok().as_deref() != Some(&want[..]) {
        fs::write(&ip, &want).map_err(io_err(&ip))?;
    }
    Ok(ledger)
}

/// Secret key file contents. Keys are stored unencrypted; the file is created
/// with owner-only permissions.
#[derive(Debug, Serialize, Deserialize)]
pub struct KeyFile {
    pub participant: usize,
    pub ledger_id: String,
    pub secret_key: String,
}

pub fn write_keyfile(path: &Path, l: &Ledger, participant: usize, sk: &SecretKey) -> Result<(), StoreError> {
    let kf = KeyFile {
        participant,
        ledger_id: hex::encode(l.id()),
        secret_key: hex::encode(sk.encode(&l.pp.ring)),
    };
    let text = serde_json::to_string_pretty(&kf).expect("key file serializes");
    let mut opts = OpenOptions::new();
    opts.write(true).create(true).truncate(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::OpenOptionsExt;
        opts.mode(0o600);
    }
    let mut f = opts.open(path).map_err(io_err(path))?;
    f.write_all(text.as_bytes()).map_err(io_err(path))
}

/// Reads a key file and checks it belongs to `l` and matches the registered key.
pub fn read_keyfile(path: &Path, l: &Ledger) -> Result<(usize, SecretKey), StoreError> {
    let bad = |reason: String| StoreError::Key { path: path.to_path_buf(), reason };
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let kf: KeyFile = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    if kf.ledger_id != hex::encode(l.id()) {
        return Err(bad("belongs to a different ledger".into()));
    }
    let raw = hex::decode(&kf.secret_key).map_err(|e| bad(e.to_string()))?;
    let sk = SecretKey::decode(&l.pp.ring, &l.pp.params, &raw).map_err(|e| bad(e.to_string()))?;
    if l.participant_of(&sk) != Some(kf.participant) {
        return Err(bad("secret key does not match the registered participant".into()));
    }
    Ok((kf.participant, sk))
}

//! C ABI over the `pqetl` ledger.
//!
//! All objects are opaque heap handles released with their `*_free`
//! function. Every fallible call returns a [`PqetlStatus`]; on failure a
//! description is available from [`pqetl_last_error`] on the same thread.
//! Panics never cross the boundary and are reported as `PQETL_ERR_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::ptr;

use pqetl::commit::SecretKey;
use pqetl::ledger::store::{self, StoreError};
use pqetl::ledger::{CreateOptions, Ledger, LedgerConfig, LedgerError, Transaction, ValueList};
use pqetl::params::ParamSet;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PqetlStatus {
    Ok = 0,
    /// A required pointer argument was null.
    ErrNull = 1,
    /// Malformed input, bad parameters, overspend or missing key.
    ErrInvalid = 2,
    /// A proof or stored record failed verification.
    ErrVerify = 3,
    /// File system failure.
    ErrIo = 4,
    /// Output buffer too small; the required size was written.
    ErrBuffer = 5,
    /// Internal panic caught at the boundary.
    ErrPanic = 6,
}

/// Ledger state plus the file it is persisted to, if any.
pub struct PqetlLedger {
    ledger: Ledger,
    path: Option<PathBuf>,
}

/// A participant's secret key.
pub struct PqetlKey {
    participant: usize,
    sk: SecretKey,
}

/// A transaction row.
pub struct PqetlTx {
    tx: Transaction,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Fail(PqetlStatus, String);

impl From<LedgerError> for Fail {
    fn from(e: LedgerError) -> Self {
        match e {
            LedgerError::Rejected(f) => Fail(PqetlStatus::ErrVerify, f.to_string()),
            e => Fail(PqetlStatus::ErrInvalid, e.to_string()),
        }
    }
}

impl From<StoreError> for Fail {
    fn from(e: StoreError) -> Self {
        let s = match &e {
            StoreError::Io { .. } | StoreError::Exists(_) => PqetlStatus::ErrIo,
            StoreError::Corrupt { .. } => PqetlStatus::ErrVerify,
            StoreError::Ledger(_) | StoreError::Key { .. } => PqetlStatus::ErrInvalid,
        };
        Fail(s, e.to_string())
    }
}

fn invalid(m: impl ToString) -> Fail {
    Fail(PqetlStatus::ErrInvalid, m.to_string())
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PqetlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PqetlStatus::Ok
        }
        Ok(Err(Fail(s, m))) => {
            set_error(&m);
            s
        }
        Err(_) => {
            set_error("internal panic");
            PqetlStatus::ErrPanic
        }
    }
}

fn null() -> Fail {
    Fail(PqetlStatus::ErrNull, "null pointer argument".into())
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(null)
}

unsafe fn deref_mut<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(null)
}

unsafe fn slice<'a, T>(p: *const T, len: usize) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a Path, Fail> {
    let s = CStr::from_ptr(deref(p)?).to_str().map_err(|_| invalid("path is not UTF-8"))?;
    Ok(Path::new(s))
}

unsafe fn seed(p: *const u8) -> Result<[u8; 32], Fail> {
    Ok(slice(p, 32)?.try_into().expect("32 bytes"))
}

fn values(flat: &[i64], assets: usize, parties: usize) -> Result<ValueList, Fail> {
    if parties == 0 || flat.len() != assets * parties {
        return Err(invalid(format!("expected {} values, got {}", assets * parties, flat.len())));
    }
    Ok(ValueList(flat.chunks(parties).map(|c| c.iter().map(|&v| v as i128).collect()).collect()))
}

fn boxed<T>(out: *mut *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    // SAFETY: checked non-null above; the caller provides a writable slot.
    unsafe { *out = Box::into_raw(Box::new(v)) };
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pqetl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread (empty after success).
/// Valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn pqetl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates an in-memory ledger.
///
/// `params` names a parameter set (`"paper"`, `"desk"`) or a TOML file.
/// `genesis` holds `assets * parties` amounts, asset-major. `seed` points to
/// 32 bytes. `out_keys` receives `parties` key handles.
#[no_mangle]
pub unsafe extern "C" fn pqetl_ledger_setup(
    params: *const c_char,
    parties: usize,
    assets: usize,
    compact: bool,
    genesis: *const i64,
    genesis_len: usize,
    seed_ptr: *const u8,
    out_ledger: *mut *mut PqetlLedger,
    out_keys: *mut *mut PqetlKey,
    out_keys_len: usize,
) -> PqetlStatus {
    guard(|| {
        let name = CStr::from_ptr(deref(params)?).to_str().map_err(|_| invalid("params is not UTF-8"))?;
        let ps = ParamSet::resolve(name).map_err(invalid)?;
        let vals = values(slice(genesis, genesis_len)?, assets, parties)?;
        if out_keys.is_null() || out_ledger.is_null() {
            return Err(null());
        }
        if out_keys_len != parties {
            return Err(invalid(format!("out_keys must hold {parties} handles")));
        }
        let (ledger, sks) = Ledger::setup(&ps, LedgerConfig { assets, compact }, &vals, seed(seed_ptr)?)?;
        let keys = std::slice::from_raw_parts_mut(out_keys, parties);
        for (i, (slot, sk)) in keys.iter_mut().zip(sks).enumerate() {
            *slot = Box::into_raw(Box::new(PqetlKey { participant: i, sk }));
        }
        boxed(out_ledger, PqetlLedger { ledger, path: None })
    })
}

/// Loads a ledger file. Later appends are written back to it.
#[no_mangle]
pub unsafe extern "C" fn pqetl_ledger_open(file: *const c_char, out: *mut *mut PqetlLedger) -> PqetlStatus {
    guard(|| {
        let p = path(file)?;
        let ledger = store::load(p)?;
        boxed(out, PqetlLedger { ledger, path: Some(p.to_path_buf()) })
    })
}

/// Writes the ledger to a new file, which then receives later appends.
#[no_mangle]
pub unsafe extern "C" fn pqetl_ledger_save(l: *mut PqetlLedger, file: *const c_char) -> PqetlStatus {
    guard(|| {
        let l = deref_mut(l)?;
        let p = path(file)?;
        store::create(p, &l.ledger)?;
        l.path = Some(p.to_path_buf());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pqetl_ledger_free(l: *mut PqetlLedger) {
    if !l.is_null() {
        drop(Box::from_raw(l));
    }
}

/// Participant count, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pqetl_ledger_parties(l: *const PqetlLedger) -> usize {
    l.as_ref().map_or(0, |l| l.ledger.parties())
}

/// Asset count, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pqetl_ledger_assets(l: *const PqetlLedger) -> usize {
    l.as_ref().map_or(0, |l| l.ledger.config.assets)
}

/// Number of appended transactions, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pqetl_ledger_len(l: *const PqetlLedger) -> usize {
    l.as_ref().map_or(0, |l| l.ledger.len())
}

/// Re-verifies key proofs and every transaction.
#[no_mangle]
pub unsafe extern "C" fn pqetl_ledger_verify(l: *const PqetlLedger) -> PqetlStatus {
    guard(|| {
        deref(l)?
            .ledger
            .verify_all()
            .map_err(|(k, f)| Fail(PqetlStatus::ErrVerify, format!("transaction {k}: {f}")))
    })
}

/// Reads a key file belonging to `l`.
#[no_mangle]
pub unsafe extern "C" fn pqetl_key_read(l: *const PqetlLedger, file: *const c_char, out: *mut *mut PqetlKey) -> PqetlStatus {
    guard(|| {
        let (participant, sk) = store::read_keyfile(path(file)?, &deref(l)?.ledger)?;
        boxed(out, PqetlKey { participant, sk })
    })
}

/// Writes a key file (owner-only permissions on Unix).
#[no_mangle]
pub unsafe extern "C" fn pqetl_key_write(l: *const PqetlLedger, k: *const PqetlKey, file: *const c_char) -> PqetlStatus {
    guard(|| {
        let k = deref(k)?;
        store::write_keyfile(path(file)?, &deref(l)?.ledger, k.participant, &k.sk)?;
        Ok(())
    })
}

/// Participant index of a key, or `SIZE_MAX` for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pqetl_key_participant(k: *const PqetlKey) -> usize {
    k.as_ref().map_or(usize::MAX, |k| k.participant)
}

#[no_mangle]
pub unsafe extern "C" fn pqetl_key_free(k: *mut PqetlKey) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// Decrypts the key holder's balance of `asset`.
#[no_mangle]
pub unsafe extern "C" fn pqetl_balance(l: *const PqetlLedger, k: *const PqetlKey, asset: usize, out: *mut i64) -> PqetlStatus {
    guard(|| {
        let k = deref(k)?;
        let b = deref(l)?.ledger.check_balance(&k.sk, k.participant, asset)?;
        *deref_mut(out)? = i64::try_from(b).map_err(|_| invalid("balance exceeds i64"))?;
        Ok(())
    })
}

/// Builds a transaction. `vals` holds `assets * parties` amounts,
/// asset-major. `keys` may hold any subset of the participants' keys;
/// every spender must be present. `force` skips the balance and overspend
/// checks so invalid rows can be produced for testing.
#[no_mangle]
pub unsafe extern "C" fn pqetl_tx_create(
    l: *const PqetlLedger,
    vals: *const i64,
    vals_len: usize,
    keys: *const *const PqetlKey,
    keys_len: usize,
    seed_ptr: *const u8,
    force: bool,
    out: *mut *mut PqetlTx,
) -> PqetlStatus {
    guard(|| {
        let ledger = &deref(l)?.ledger;
        let n = ledger.parties();
        let v = values(slice(vals, vals_len)?, ledger.config.assets, n)?;
        let mut by_index: Vec<Option<&SecretKey>> = vec![None; n];
        for &k in slice(keys, keys_len)? {
            let k = deref(k)?;
            *by_index.get_mut(k.participant).ok_or_else(|| invalid("key participant out of range"))? = Some(&k.sk);
        }
        let mut rng = ChaCha20Rng::from_seed(seed(seed_ptr)?);
        let opts = CreateOptions { force, ..Default::default() };
        let (tx, _) = ledger.create_tx(&v, &by_index, &mut rng, &opts)?;
        boxed(out, PqetlTx { tx })
    })
}

/// Verifies a transaction against the current ledger state without
/// appending it.
#[no_mangle]
pub unsafe extern "C" fn pqetl_tx_verify(l: *const PqetlLedger, tx: *const PqetlTx) -> PqetlStatus {
    guard(|| {
        let ledger = &deref(l)?.ledger;
        ledger.verify_tx(&deref(tx)?.tx).map_err(|f| Fail(PqetlStatus::ErrVerify, f.to_string()))
    })
}

/// Verifies and appends a transaction (persisting it when the ledger is
/// file-backed) and writes its row index to `out_index`. `tx` stays owned
/// by the caller.
#[no_mangle]
pub unsafe extern "C" fn pqetl_ledger_append(l: *mut PqetlLedger, tx: *const PqetlTx, out_index: *mut usize) -> PqetlStatus {
    guard(|| {
        let l = deref_mut(l)?;
        let tx = deref(tx)?.tx.clone();
        let out_index = deref_mut(out_index)?;
        if let Some(p) = &l.path {
            l.ledger.verify_tx(&tx).map_err(|f| Fail(PqetlStatus::ErrVerify, f.to_string()))?;
            store::append_tx(p, &l.ledger.pp, &tx)?;
        }
        *out_index = l.ledger.append(tx)?;
        Ok(())
    })
}

/// Serializes a transaction. With `buf` null or `cap` too small, writes the
/// required size to `out_len` and returns `PQETL_ERR_BUFFER`.
#[no_mangle]
pub unsafe extern "C" fn pqetl_tx_encode(
    l: *const PqetlLedger,
    tx: *const PqetlTx,
    buf: *mut u8,
    cap: usize,
    out_len: *mut usize,
) -> PqetlStatus {
    guard(|| {
        let bytes = deref(tx)?.tx.encode(&deref(l)?.ledger.pp);
        *deref_mut(out_len)? = bytes.len();
        if buf.is_null() || cap < bytes.len() {
            return Err(Fail(PqetlStatus::ErrBuffer, format!("need {} bytes", bytes.len())));
        }
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf, bytes.len());
        Ok(())
    })
}

/// Parses a serialized transaction. Does not verify it.
#[no_mangle]
pub unsafe extern "C" fn pqetl_tx_decode(l: *const PqetlLedger, bytes: *const u8, len: usize, out: *mut *mut PqetlTx) -> PqetlStatus {
    guard(|| {
        let tx = Transaction::decode(&deref(l)?.ledger.pp, slice(bytes, len)?).map_err(invalid)?;
        boxed(out, PqetlTx { tx })
    })
}

#[no_mangle]
pub unsafe extern "C" fn pqetl_tx_free(tx: *mut PqetlTx) {
    if !tx.is_null() {
        drop(Box::from_raw(tx));
    }
}

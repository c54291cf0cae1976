//! The encrypted table: one commitment per (transaction, asset, participant).
//!
//! Every transaction row covers all registered participants, so parties who
//! do not transact hide among zero-valued decoy cells. A cell carries the
//! value commitment `com`, a recommitment `com'`, consistency proofs for both,
//! a range proof on `com'` and an OR proof that `com'` either recommits the
//! cell value (receivers, decoys) or the owner's new column balance (spenders).
//! One balance proof per asset shows the row sums to zero.
//!
//! In compact mode all assets share one commitment per participant, one asset
//! per coefficient, and the compact range proof replaces the per-asset one.

pub mod store;
mod tx;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::commit::{commit_tx, extract, keygen, CommitError, Commitment, PublicKey, PublicParams, SecretKey};
use crate::params::{ParamSet, ParamsError};
use crate::ring::{vec::vec_add, Poly};
use crate::sampling::chi_polys;
use crate::transcript::digest;
use crate::zkp::eq::{prove_pokw, verify_pokw, EqProof, PoeStatement, PokwStatement};
use crate::zkp::or::{prove_or, verify_or, OrStatement, OrWitness};
use crate::zkp::poa::{prove_poa, verify_poa, PoaStatement};
use crate::zkp::poa_compact::{prove_poa_compact, verify_poa_compact, PoaCompactStatement};
use crate::zkp::pob::{prove_pob, verify_pob};
use crate::zkp::poc::{prove_poc, verify_poc, PocStatement};
use crate::zkp::poe2::Poe2Statement;
use crate::zkp::{ProofError, ProveOptions};

pub use tx::{Cell, Lane, RangeProof, Transaction};

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("parameters: {0}")]
    Params(#[from] ParamsError),
    #[error("invalid value list: {0}")]
    Values(String),
    #[error("duplicate participant key at index {0}")]
    DuplicateParticipant(usize),
    #[error("missing secret key for spending participant {0}")]
    MissingKey(usize),
    #[error("participant {participant} would overspend asset {asset} (balance {balance}, change {change})")]
    Overspend { participant: usize, asset: usize, balance: i128, change: i128 },
    #[error("no such participant or asset")]
    Index,
    #[error("extraction failed: {0}")]
    Extraction(#[from] CommitError),
    #[error("proving {what}: {source}")]
    Prove { what: ProofId, source: ProofError },
    #[error("transaction rejected: {0}")]
    Rejected(VerifyFailure),
    #[error("participant key proof {0} failed: {1}")]
    KeyProof(usize, ProofError),
}

/// Ledger shape, fixed at setup.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LedgerConfig {
    pub assets: usize,
    pub compact: bool,
}

/// Signed amounts, `values[asset][participant]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueList(pub Vec<Vec<i128>>);

impl ValueList {
    pub fn zeros(assets: usize, parties: usize) -> Self {
        ValueList(vec![vec![0; parties]; assets])
    }

    /// Moves `amount` of `asset` from `from` to `to`.
    pub fn transfer(assets: usize, parties: usize, asset: usize, from: usize, to: usize, amount: i128) -> Self {
        let mut v = Self::zeros(assets, parties);
        v.0[asset][from] -= amount;
        v.0[asset][to] += amount;
        v
    }

    pub fn is_balanced(&self) -> bool {
        self.0.iter().all(|row| row.iter().sum::<i128>() == 0)
    }

    fn check_shape(&self, assets: usize, parties: usize) -> Result<(), LedgerError> {
        if self.0.len() != assets || self.0.iter().any(|r| r.len() != parties) {
            return Err(LedgerError::Values(format!("expected {assets} assets x {parties} participants")));
        }
        Ok(())
    }
}

/// Names one proof inside a transaction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProofId {
    pub role: ProofRole,
    /// Asset lane (always 0 in compact mode).
    pub lane: usize,
    pub participant: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProofRole {
    Structure,
    PoB,
    PoC,
    PoCPrime,
    PoA,
    PoACompact,
    Or,
}

impl ProofRole {
    pub fn name(self) -> &'static str {
        match self {
            ProofRole::Structure => "structure",
            ProofRole::PoB => "PoB",
            ProofRole::PoC => "PoC",
            ProofRole::PoCPrime => "PoC'",
            ProofRole::PoA => "PoA",
            ProofRole::PoACompact => "PoA'",
            ProofRole::Or => "PoE|PoE2",
        }
    }
}

impl std::fmt::Display for ProofId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (lane {}", self.role.name(), self.lane)?;
        if let Some(i) = self.participant {
            write!(f, ", participant {i}")?;
        }
        write!(f, ")")
    }
}

/// First failing proof of a transaction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyFailure {
    pub proof: ProofId,
    pub reason: String,
}

impl std::fmt::Display for VerifyFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.proof, self.reason)
    }
}

/// Per-role proving time, summed over cells.
pub type Timings = BTreeMap<ProofRole, (usize, Duration)>;

#[derive(Clone, Copy, Debug, Default)]
pub struct CreateOptions {
    /// Build the transaction even if the value list is unbalanced or overspends.
    pub force: bool,
    pub prove: ProveOptions,
}

#[derive(Clone, Debug)]
pub struct Participant {
    pub pk: PublicKey,
    pub pokw: EqProof,
}

pub struct Ledger {
    pub pp: PublicParams,
    pub config: LedgerConfig,
    pub participants: Vec<Participant>,
    /// `table[t][lane][i]`; row 0 holds the genesis commitments.
    pub table: Vec<Vec<Vec<Commitment>>>,
    pub txs: Vec<Transaction>,
    /// Column sums `sum_t table[t][lane][i]`.
    sums: Vec<Vec<Commitment>>,
    id: [u8; 32],
}

/// Identifier binding every proof to this ledger's parameters and shape.
pub fn ledger_id(pp: &PublicParams, config: &LedgerConfig) -> [u8; 32] {
    let mut h = pp.params.to_toml().into_bytes();
    h.extend_from_slice(&pp.seed);
    h.extend_from_slice(&(config.assets as u64).to_le_bytes());
    h.push(config.compact as u8);
    digest("pqetl/ledger-id", &h)
}

impl Ledger {
    /// Fresh ledger: expands public keys from `seed`, generates one keypair
    /// per genesis participant with its key proof, and commits the genesis row.
    pub fn setup(
        params: &ParamSet,
        config: LedgerConfig,
        genesis: &ValueList,
        seed: [u8; 32],
    ) -> Result<(Ledger, Vec<SecretKey>), LedgerError> {
        let parties = genesis.0.first().map_or(0, Vec::len);
        if parties == 0 || config.assets == 0 {
            return Err(LedgerError::Values("need at least one participant and one asset".into()));
        }
        genesis.check_shape(config.assets, parties)?;
        let pp = PublicParams::expand(params, seed)?;
        Self::check_config(&pp, &config)?;
        if let Some(v) = genesis.0.iter().flatten().find(|&&v| v < 0 || v > max_value(&pp, &config)) {
            return Err(LedgerError::Values(format!("genesis value {v} out of range")));
        }
        let id = ledger_id(&pp, &config);
        let mut rng = ChaCha20Rng::from_seed(digest("pqetl/setup-rng", &seed));
        let mut sks = Vec::with_capacity(parties);
        let mut participants: Vec<Participant> = Vec::with_capacity(parties);
        for i in 0..parties {
            let (sk, pk) = keygen(&pp, &mut rng);
            if participants.iter().any(|p| p.pk == pk) {
                return Err(LedgerError::DuplicateParticipant(i));
            }
            let st = PokwStatement { pk: &pk };
            let pokw = prove_pokw(&pp, &ctx(&id, 0, i, b"pokw"), &st, &sk, &mut rng, &ProveOptions::default())
                .map_err(|source| LedgerError::Prove {
                    what: ProofId { role: ProofRole::Structure, lane: 0, participant: Some(i) },
                    source,
                })?;
            participants.push(Participant { pk, pokw });
            sks.push(sk);
        }
        let mut ledger = Ledger { pp, config, participants, table: vec![], txs: vec![], sums: vec![], id };
        let n = ledger.pp.params.n_rand();
        let row: Vec<Vec<Commitment>> = (0..ledger.lanes())
            .map(|lane| {
                (0..parties)
                    .map(|i| {
                        let r = chi_polys(&ledger.pp.ring, &mut rng, n);
                        let m = ledger.msg(&ledger.lane_values(genesis, lane, i));
                        commit_tx(&ledger.pp, &ledger.participants[i].pk, &m, &r).expect("dimensions")
                    })
                    .collect()
            })
            .collect();
        ledger.push_row(row);
        Ok((ledger, sks))
    }

    fn check_config(pp: &PublicParams, config: &LedgerConfig) -> Result<(), LedgerError> {
        let p = &pp.params;
        if config.compact {
            let beta = p.beta_bits as usize;
            if config.assets > p.d || beta == 0 || !p.d.is_multiple_of(beta) {
                return Err(LedgerError::Values(format!("compact mode supports at most d = {} assets", p.d)));
            }
        }
        Ok(())
    }

    /// Rebuilds a ledger from stored parts without re-verifying transactions.
    pub(crate) fn from_parts(
        pp: PublicParams,
        config: LedgerConfig,
        participants: Vec<Participant>,
        genesis: Vec<Vec<Commitment>>,
    ) -> Result<Ledger, LedgerError> {
        Self::check_config(&pp, &config)?;
        let id = ledger_id(&pp, &config);
        let mut l = Ledger { pp, config, participants, table: vec![], txs: vec![], sums: vec![], id };
        l.push_row(genesis);
        Ok(l)
    }

    pub fn id(&self) -> [u8; 32] {
        self.id
    }

    pub fn parties(&self) -> usize {
        self.participants.len()
    }

    /// Commitment lanes per row: one per asset, or one in compact mode.
    pub fn lanes(&self) -> usize {
        if self.config.compact {
            1
        } else {
            self.config.assets
        }
    }

    /// Number of verified transactions (the genesis row is not counted).
    pub fn len(&self) -> usize {
        self.txs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.txs.is_empty()
    }

    pub fn column_sum(&self, lane: usize, i: usize) -> &Commitment {
        &self.sums[lane][i]
    }

    fn lane_values(&self, v: &ValueList, lane: usize, i: usize) -> Vec<i128> {
        if self.config.compact {
            (0..self.config.assets).map(|a| v.0[a][i]).collect()
        } else {
            vec![v.0[lane][i]]
        }
    }

    fn msg(&self, vals: &[i128]) -> Poly {
        let ring = &self.pp.ring;
        let mut m = ring.zero();
        for (c, &v) in m.0.iter_mut().zip(vals) {
            *c = ring.md.from_i128(v);
        }
        m
    }

    fn push_row(&mut self, row: Vec<Vec<Commitment>>) {
        let ring = &self.pp.ring;
        if self.sums.is_empty() {
            self.sums = row.clone();
        } else {
            for (s, r) in self.sums.iter_mut().zip(&row) {
                for (a, b) in s.iter_mut().zip(r) {
                    *a = a.add(ring, b);
                }
            }
        }
        self.table.push(row);
    }

    /// Verifies every participant's key proof.
    pub fn verify_keys(&self) -> Result<(), LedgerError> {
        self.participants.par_iter().enumerate().try_for_each(|(i, p)| {
            verify_pokw(&self.pp, &ctx(&self.id, 0, i, b"pokw"), &PokwStatement { pk: &p.pk }, &p.pokw)
                .map_err(|e| LedgerError::KeyProof(i, e))
        })
    }

    /// Decrypted column balance of participant `i` in `lane`, one entry per
    /// asset of the lane.
    fn lane_balance(&self, sk: &SecretKey, lane: usize, i: usize) -> Result<Vec<i128>, LedgerError> {
        let v = extract(&self.pp, sk, &self.sums[lane][i])?;
        let md = &self.pp.ring.md;
        let k = if self.config.compact { self.config.assets } else { 1 };
        if !self.config.compact && v.0[1..].iter().any(|&c| c != 0) {
            return Err(CommitError::NotConstant.into());
        }
        Ok(v.0[..k].iter().map(|&c| md.centered(c)).collect())
    }

    /// Balance of `asset` for participant `i`, decrypted with its secret key.
    pub fn check_balance(&self, sk: &SecretKey, i: usize, asset: usize) -> Result<i128, LedgerError> {
        if i >= self.parties() || asset >= self.config.assets {
            return Err(LedgerError::Index);
        }
        let (lane, k) = if self.config.compact { (0, asset) } else { (asset, 0) };
        Ok(self.lane_balance(sk, lane, i)?[k])
    }

    /// Index of the participant owning `sk`, found by recomputing its public key.
    pub fn participant_of(&self, sk: &SecretKey) -> Option<usize> {
        let ring = &self.pp.ring;
        let pk1 = vec_add(ring, &self.pp.a.tmul_vec(ring, &sk.s1), &sk.e1);
        self.participants.iter().position(|p| p.pk.pk1 == pk1)
    }

    /// Builds a transaction for `values`. `keys[i]` must hold the secret key
    /// of every participant with a negative amount.
    pub fn create_tx<R: RngCore + ?Sized>(
        &self,
        values: &ValueList,
        keys: &[Option<&SecretKey>],
        rng: &mut R,
        opts: &CreateOptions,
    ) -> Result<(Transaction, Timings), LedgerError> {
        let (parties, lanes) = (self.parties(), self.lanes());
        values.check_shape(self.config.assets, parties)?;
        if keys.len() != parties {
            return Err(LedgerError::Values(format!("expected {parties} key slots")));
        }
        let limit = max_value(&self.pp, &self.config);
        if let Some(v) = values.0.iter().flatten().find(|v| v.abs() > limit) {
            return Err(LedgerError::Values(format!("amount {v} exceeds the value range")));
        }
        if !opts.force && !values.is_balanced() {
            return Err(LedgerError::Values("amounts of some asset do not sum to zero".into()));
        }
        let (ring, n) = (&self.pp.ring, self.pp.params.n_rand());

        // plan: cell values, new balances for spenders
        let mut plans = Vec::with_capacity(lanes * parties);
        for lane in 0..lanes {
            for i in 0..parties {
                let vals = self.lane_values(values, lane, i);
                let spender = vals.iter().any(|&v| v < 0);
                let newbal = if spender {
                    let sk = keys[i].ok_or(LedgerError::MissingKey(i))?;
                    let bal = self.lane_balance(sk, lane, i)?;
                    let nb: Vec<i128> = bal.iter().zip(&vals).map(|(b, v)| b + v).collect();
                    if let (false, Some(k)) = (opts.force, nb.iter().position(|&x| x < 0)) {
                        let asset = if self.config.compact { k } else { lane };
                        return Err(LedgerError::Overspend { participant: i, asset, balance: bal[k], change: vals[k] });
                    }
                    Some(nb)
                } else {
                    None
                };
                let mut seed = [0u8; 32];
                rng.fill_bytes(&mut seed);
                plans.push((lane, i, vals, newbal, seed));
            }
        }

        // value commitments first: the balance proofs need whole rows
        let mut crng = ChaCha20Rng::from_seed({
            let mut s = [0u8; 32];
            rng.fill_bytes(&mut s);
            s
        });
        let opened: Vec<(Commitment, Vec<Poly>)> = plans
            .iter()
            .map(|(_, i, vals, _, _)| {
                let r = chi_polys(ring, &mut crng, n);
                let com = commit_tx(&self.pp, &self.participants[*i].pk, &self.msg(vals), &r).expect("dimensions");
                (com, r)
            })
            .collect();

        let mut pob_seeds = Vec::with_capacity(lanes);
        for _ in 0..lanes {
            let mut s = [0u8; 32];
            rng.fill_bytes(&mut s);
            pob_seeds.push(s);
        }
        let pobs: Vec<_> = (0..lanes)
            .into_par_iter()
            .map(|lane| {
                let cells = &opened[lane * parties..(lane + 1) * parties];
                let coms: Vec<Commitment> = cells.iter().map(|c| c.0.clone()).collect();
                let mut r_sum = vec![ring.zero(); n];
                for (_, r) in cells {
                    r_sum = vec_add(ring, &r_sum, r);
                }
                let t = Instant::now();
                let mut g = ChaCha20Rng::from_seed(pob_seeds[lane]);
                let pf = prove_pob(&self.pp, &ctx(&self.id, lane, 0, b"pob"), &coms, &r_sum, &mut g, &opts.prove)
                    .map_err(|source| LedgerError::Prove {
                        what: ProofId { role: ProofRole::PoB, lane, participant: None },
                        source,
                    })?;
                Ok((pf, (ProofRole::PoB, t.elapsed())))
            })
            .collect::<Result<_, LedgerError>>()?;

        let cells: Vec<(Cell, Vec<(ProofRole, Duration)>)> = plans
            .par_iter()
            .zip(opened.par_iter())
            .map(|((lane, i, vals, newbal, seed), (com, r))| {
                self.prove_cell(*lane, *i, vals, newbal.as_deref(), keys[*i], com, r, *seed, &opts.prove)
            })
            .collect::<Result<_, LedgerError>>()?;

        let mut timings = Timings::new();
        let mut add = |(role, d): (ProofRole, Duration)| {
            let e = timings.entry(role).or_insert((0, Duration::ZERO));
            e.0 += 1;
            e.1 += d;
        };
        let mut lanes_out = Vec::with_capacity(lanes);
        let mut cells = cells.into_iter();
        for (pob, t) in pobs {
            add(t);
            let mut row = Vec::with_capacity(parties);
            for _ in 0..parties {
                let (cell, ts) = cells.next().expect("one cell per participant");
                ts.into_iter().for_each(&mut add);
                row.push(cell);
            }
            lanes_out.push(Lane { pob, cells: row });
        }
        Ok((Transaction { lanes: lanes_out }, timings))
    }

    #[allow(clippy::too_many_arguments)]
    fn prove_cell(
        &self,
        lane: usize,
        i: usize,
        vals: &[i128],
        newbal: Option<&[i128]>,
        sk: Option<&SecretKey>,
        com: &Commitment,
        r: &[Poly],
        seed: [u8; 32],
        opts: &ProveOptions,
    ) -> Result<(Cell, Vec<(ProofRole, Duration)>), LedgerError> {
        let pp = &self.pp;
        let ring = &pp.ring;
        let pk = &self.participants[i].pk;
        let mut g = ChaCha20Rng::from_seed(seed);
        let err = |role| move |source| LedgerError::Prove { what: ProofId { role, lane, participant: Some(i) }, source };
        let mut times = Vec::with_capacity(4);
        let compact = self.config.compact;

        let vals2 = newbal.unwrap_or(vals);
        let m = self.msg(vals);
        let m2 = self.msg(vals2);
        let r2 = chi_polys(ring, &mut g, pp.params.n_rand());
        let com2 = commit_tx(pp, pk, &m2, &r2).expect("dimensions");

        let t = Instant::now();
        let st = PocStatement { pk, com, compact };
        let poc = prove_poc(pp, &ctx(&self.id, lane, i, b"poc"), &st, r, &m, &mut g, opts).map_err(err(ProofRole::PoC))?;
        times.push((ProofRole::PoC, t.elapsed()));
        let t = Instant::now();
        let st = PocStatement { pk, com: &com2, compact };
        let poc2 = prove_poc(pp, &ctx(&self.id, lane, i, b"poc'"), &st, &r2, &m2, &mut g, opts)
            .map_err(err(ProofRole::PoCPrime))?;
        times.push((ProofRole::PoCPrime, t.elapsed()));

        let t = Instant::now();
        let range = if compact {
            let st = PoaCompactStatement { pk, com: &com2 };
            let pf = prove_poa_compact(pp, &ctx(&self.id, lane, i, b"poa'"), &st, &r2, vals2, &mut g, opts)
                .map_err(err(ProofRole::PoACompact))?;
            times.push((ProofRole::PoACompact, t.elapsed()));
            RangeProof::Compact(pf)
        } else {
            let st = PoaStatement { pk, com: &com2 };
            let pf = prove_poa(pp, &ctx(&self.id, lane, i, b"poa"), &st, &r2, vals2[0], &mut g, opts)
                .map_err(err(ProofRole::PoA))?;
            times.push((ProofRole::PoA, t.elapsed()));
            RangeProof::Standard(pf)
        };

        let t = Instant::now();
        let total = self.sums[lane][i].add(ring, com);
        let st = OrStatement {
            poe: PoeStatement { pk, com: &total, com2: &com2 },
            poe2: Poe2Statement { pk, com, com2: &com2 },
        };
        let wit = match newbal {
            Some(_) => OrWitness::Poe { sk: sk.ok_or(LedgerError::MissingKey(i))? },
            None => OrWitness::Poe2 { r, r2: &r2 },
        };
        let or = prove_or(pp, &ctx(&self.id, lane, i, b"or"), &st, &wit, &mut g, opts).map_err(err(ProofRole::Or))?;
        times.push((ProofRole::Or, t.elapsed()));
        Ok((Cell { com: com.clone(), com2, poc, poc2, range, or }, times))
    }

    /// Checks every proof of `tx` against the current state and reports the
    /// first failing one (balance proofs first, then cells in row order).
    pub fn verify_tx(&self, tx: &Transaction) -> Result<(), VerifyFailure> {
        self.verify_at(&self.sums, tx)
    }

    fn verify_at(&self, sums: &[Vec<Commitment>], tx: &Transaction) -> Result<(), VerifyFailure> {
        let (parties, lanes) = (self.parties(), self.lanes());
        let structure = |reason: &str| VerifyFailure {
            proof: ProofId { role: ProofRole::Structure, lane: 0, participant: None },
            reason: reason.into(),
        };
        if tx.lanes.len() != lanes || tx.lanes.iter().any(|l| l.cells.len() != parties) {
            return Err(structure("row shape does not match the ledger"));
        }
        let compact = self.config.compact;
        if tx.lanes.iter().flat_map(|l| &l.cells).any(|c| matches!(c.range, RangeProof::Compact(_)) != compact) {
            return Err(structure("range proof kind does not match the ledger mode"));
        }
        let fail = |role, lane, participant| {
            move |e: ProofError| VerifyFailure { proof: ProofId { role, lane, participant }, reason: e.to_string() }
        };
        for (lane, l) in tx.lanes.iter().enumerate() {
            let coms: Vec<Commitment> = l.cells.iter().map(|c| c.com.clone()).collect();
            verify_pob(&self.pp, &ctx(&self.id, lane, 0, b"pob"), &coms, &l.pob)
                .map_err(fail(ProofRole::PoB, lane, None))?;
        }
        let jobs: Vec<(usize, usize)> = (0..lanes).flat_map(|a| (0..parties).map(move |i| (a, i))).collect();
        let results: Vec<Result<(), VerifyFailure>> = jobs
            .par_iter()
            .map(|&(lane, i)| {
                let c = &tx.lanes[lane].cells[i];
                let (pp, pk) = (&self.pp, &self.participants[i].pk);
                let f = |role| fail(role, lane, Some(i));
                verify_poc(pp, &ctx(&self.id, lane, i, b"poc"), &PocStatement { pk, com: &c.com, compact }, &c.poc)
                    .map_err(f(ProofRole::PoC))?;
                let st = PocStatement { pk, com: &c.com2, compact };
                verify_poc(pp, &ctx(&self.id, lane, i, b"poc'"), &st, &c.poc2).map_err(f(ProofRole::PoCPrime))?;
                match &c.range {
                    RangeProof::Standard(pf) => {
                        let st = PoaStatement { pk, com: &c.com2 };
                        verify_poa(pp, &ctx(&self.id, lane, i, b"poa"), &st, pf).map_err(f(ProofRole::PoA))?
                    }
                    RangeProof::Compact(pf) => {
                        let st = PoaCompactStatement { pk, com: &c.com2 };
                        verify_poa_compact(pp, &ctx(&self.id, lane, i, b"poa'"), &st, pf)
                            .map_err(f(ProofRole::PoACompact))?
                    }
                }
                let total = sums[lane][i].add(&pp.ring, &c.com);
                let st = OrStatement {
                    poe: PoeStatement { pk, com: &total, com2: &c.com2 },
                    poe2: Poe2Statement { pk, com: &c.com, com2: &c.com2 },
                };
                verify_or(pp, &ctx(&self.id, lane, i, b"or"), &st, &c.or).map_err(f(ProofRole::Or))
            })
            .collect();
        results.into_iter().collect()
    }

    /// Verifies `tx` and appends it; returns its transaction index (1-based,
    /// row 0 being genesis). The ledger is unchanged on failure.
    pub fn append(&mut self, tx: Transaction) -> Result<usize, LedgerError> {
        self.verify_tx(&tx).map_err(LedgerError::Rejected)?;
        Ok(self.apply(tx))
    }

    /// Appends without verification (used when replaying trusted storage).
    pub(crate) fn apply(&mut self, tx: Transaction) -> usize {
        let row = tx.lanes.iter().map(|l| l.cells.iter().map(|c| c.com.clone()).collect()).collect();
        self.push_row(row);
        self.txs.push(tx);
        self.txs.len()
    }

    /// Re-verifies the key proofs and every stored transaction against the
    /// state it was appended to. Returns the 1-based index of the first bad one.
    pub fn verify_all(&self) -> Result<(), (usize, VerifyFailure)> {
        self.verify_keys().map_err(|e| {
            let proof = ProofId { role: ProofRole::Structure, lane: 0, participant: None };
            (0, VerifyFailure { proof, reason: e.to_string() })
        })?;
        let ring = &self.pp.ring;
        let mut sums = self.table[0].clone();
        for (k, (tx, row)) in self.txs.iter().zip(&self.table[1..]).enumerate() {
            self.verify_at(&sums, tx).map_err(|e| (k + 1, e))?;
            for (s, r) in sums.iter_mut().zip(row) {
                for (a, b) in s.iter_mut().zip(r) {
                    *a = a.add(ring, b);
                }
            }
        }
        Ok(())
    }
}

/// Largest amount a single cell may carry.
fn max_value(pp: &PublicParams, config: &LedgerConfig) -> i128 {
    let bits = if config.compact { pp.params.beta_bits } else { pp.params.value_bits };
    (1i128 << bits) - 1
}

/// Fiat-Shamir context of one proof.
fn ctx(id: &[u8; 32], lane: usize, i: usize, role: &[u8]) -> Vec<u8> {
    let mut c = id.to_vec();
    c.extend_from_slice(&(lane as u32).to_le_bytes());
    c.extend_from_slice(&(i as u32).to_le_bytes());
    c.extend_from_slice(role);
    c
}

//! BDLOP / ABDLOP commitments and the extractable transaction commitment
//!
//! ```text
//! com = ( A r,  pk1^T r + v,  pk2^T r + sqrt(q) v,  B^T r + v )
//! ```
//!
//! The owner of `(s1, e1, s2, e2)` strips the `A^T s` part of each key and
//! recovers `v` exactly because the `sqrt(q)` row amplifies `v` past the noise.

use std::sync::OnceLock;

use rand::RngCore;
use thiserror::Error;

use crate::params::{ParamSet, ParamsError};
use crate::ring::{mod_pm, vec::vec_add, Mat, NttVec, Poly, Ring};
use crate::sampling::{chi_polys, rng_from_seed, uniform_polys};
use crate::transcript::digest;
use crate::wire::{self, Reader, WireError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CommitError {
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("non-exact division at coefficient {0}: rows inconsistent or noise budget exceeded")]
    Extraction(usize),
    #[error("extracted element is not a constant")]
    NotConstant,
}

/// Keys for the compact range proof, expanded on first use.
#[derive(Clone, Debug)]
pub struct CompactKeys {
    pub a_a: Mat,
    pub b_y2: Mat,
    pub b_g: Mat,
    pub b_bin: Mat,
    pub b_g1: Mat,
}

/// Every public commitment key, expanded deterministically from a seed.
#[derive(Debug)]
pub struct PublicParams {
    pub params: ParamSet,
    pub ring: Ring,
    pub seed: [u8; 32],
    pub sqrt_q: u128,
    /// `kappa x n`, with `n = kappa + lambda + 3`.
    pub a: Mat,
    /// `1 x n`; the last transaction row.
    pub b: Mat,
    pub a1: Mat,
    pub a2: Mat,
    pub b1: Mat,
    pub bc1: Mat,
    pub bc2: Mat,
    pub a3: Mat,
    pub a4: Mat,
    pub beq1: Mat,
    pub beq2: Mat,
    pub a_bin: Mat,
    pub a_bin2: Mat,
    pub a_g: Mat,
    compact: OnceLock<CompactKeys>,
}

fn expand(ring: &Ring, seed: &[u8; 32], label: &str, rows: usize, cols: usize) -> Mat {
    let mut input = seed.to_vec();
    input.extend_from_slice(label.as_bytes());
    let mut rng = rng_from_seed(digest("pqetl/keys", &input));
    Mat::from_polys(ring, rows, cols, &uniform_polys(ring, &mut rng, rows * cols))
}

impl PublicParams {
    pub fn expand(params: &ParamSet, seed: [u8; 32]) -> Result<Self, ParamsError> {
        let ring = params.ring()?;
        let (k, n, p) = (params.kappa, params.n_rand(), params.proj_polys());
        let e = |label: &str, rows, cols| expand(&ring, &seed, label, rows, cols);
        Ok(PublicParams {
            sqrt_q: params.sqrt_q_u128(),
            a: e("A", k, n),
            b: e("B", 1, n),
            a1: e("A1", k, n),
            a2: e("A2", k, n),
            b1: e("B1", 1, n),
            bc1: e("Bc'", p, n),
            bc2: e("Bc''", 1, n),
            a3: e("A3", k, params.m_len()),
            a4: e("A4", k, n),
            beq1: e("Beq'", p, n),
            beq2: e("Beq''", 1, n),
            a_bin: e("a_bin", 1, n),
            a_bin2: e("a_bin'", 1, n),
            a_g: e("a_g", 1, n),
            compact: OnceLock::new(),
            params: params.clone(),
            ring,
            seed,
        })
    }

    pub fn compact(&self) -> &CompactKeys {
        self.compact.get_or_init(|| {
            let p = &self.params;
            let mu = p.compact_mu();
            let e = |label: &str, rows, cols| expand(&self.ring, &self.seed, label, rows, cols);
            CompactKeys {
                a_a: e("Aa", p.kappa, mu),
                b_y2: e("By2", p.proj_polys(), mu),
                b_g: e("Bg", 1, mu),
                b_bin: e("Bbin", p.beta_bits as usize, mu),
                b_g1: e("Bg1", 1, mu),
            }
        })
    }

    /// `sqrt(q)` as a residue.
    pub fn sqrt_q_residue(&self) -> u128 {
        self.sqrt_q % self.ring.q()
    }
}

/// `(s1, e1, s2, e2)` with `s_j in chi^{kappa d}`, `e_j in chi^{(kappa+lambda+3) d}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretKey {
    pub s1: Vec<Poly>,
    pub e1: Vec<Poly>,
    pub s2: Vec<Poly>,
    pub e2: Vec<Poly>,
}

impl SecretKey {
    /// The key-equation witness `s1 || e1 || s2 || e2`.
    pub fn witness(&self) -> Vec<Poly> {
        [&self.s1, &self.e1, &self.s2, &self.e2].into_iter().flatten().cloned().collect()
    }

    pub fn encode(&self, ring: &Ring) -> Vec<u8> {
        let mut out = Vec::new();
        for v in [&self.s1, &self.e1, &self.s2, &self.e2] {
            wire::put_short_polys(&mut out, ring, v);
        }
        out
    }

    pub fn decode(ring: &Ring, p: &ParamSet, bytes: &[u8]) -> Result<Self, WireError> {
        let mut r = Reader::new(bytes);
        let (k, n) = (Some(p.kappa), Some(p.n_rand()));
        let sk = SecretKey {
            s1: r.short_polys(ring, k)?,
            e1: r.short_polys(ring, n)?,
            s2: r.short_polys(ring, k)?,
            e2: r.short_polys(ring, n)?,
        };
        r.finish()?;
        Ok(sk)
    }
}

/// `(pk1, pk2) = (A^T s1 + e1, A^T s2 + e2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    pub pk1: Vec<Poly>,
    pub pk2: Vec<Poly>,
}

impl PublicKey {
    pub fn encode(&self, ring: &Ring) -> Vec<u8> {
        let mut out = Vec::new();
        wire::put_polys(&mut out, ring, &self.pk1);
        wire::put_polys(&mut out, ring, &self.pk2);
        out
    }

    pub fn read(r: &mut Reader, ring: &Ring, p: &ParamSet) -> Result<Self, WireError> {
        Ok(PublicKey {
            pk1: r.polys(ring, Some(p.n_rand()))?,
            pk2: r.polys(ring, Some(p.n_rand()))?,
        })
    }

    pub fn rows(&self, ring: &Ring) -> (NttVec, NttVec) {
        (NttVec::from_polys(ring, &self.pk1), NttVec::from_polys(ring, &self.pk2))
    }
}

pub fn keygen<R: RngCore + ?Sized>(pp: &PublicParams, rng: &mut R) -> (SecretKey, PublicKey) {
    let (ring, p) = (&pp.ring, &pp.params);
    let sk = SecretKey {
        s1: chi_polys(ring, rng, p.kappa),
        e1: chi_polys(ring, rng, p.n_rand()),
        s2: chi_polys(ring, rng, p.kappa),
        e2: chi_polys(ring, rng, p.n_rand()),
    };
    let pk = PublicKey {
        pk1: vec_add(ring, &pp.a.tmul_vec(ring, &sk.s1), &sk.e1),
        pk2: vec_add(ring, &pp.a.tmul_vec(ring, &sk.s2), &sk.e2),
    };
    (sk, pk)
}

/// Four-row transaction commitment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Commitment {
    pub c0: Vec<Poly>,
    pub c1: Poly,
    pub c2: Poly,
    pub c3: Poly,
}

impl Commitment {
    pub fn zero(pp: &PublicParams) -> Self {
        let r = &pp.ring;
        Commitment { c0: vec![r.zero(); pp.params.kappa], c1: r.zero(), c2: r.zero(), c3: r.zero() }
    }

    pub fn add(&self, ring: &Ring, o: &Commitment) -> Commitment {
        Commitment {
            c0: vec_add(ring, &self.c0, &o.c0),
            c1: ring.add(&self.c1, &o.c1),
            c2: ring.add(&self.c2, &o.c2),
            c3: ring.add(&self.c3, &o.c3),
        }
    }

    pub fn sub(&self, ring: &Ring, o: &Commitment) -> Commitment {
        Commitment {
            c0: crate::ring::vec::vec_sub(ring, &self.c0, &o.c0),
            c1: ring.sub(&self.c1, &o.c1),
            c2: ring.sub(&self.c2, &o.c2),
            c3: ring.sub(&self.c3, &o.c3),
        }
    }

    /// Message rows `(com1, com2, com3)`.
    pub fn msg_rows(&self) -> [&Poly; 3] {
        [&self.c1, &self.c2, &self.c3]
    }

    pub fn write(&self, out: &mut Vec<u8>, ring: &Ring) {
        wire::put_polys(out, ring, &self.c0);
        for row in self.msg_rows() {
            wire::put_polys(out, ring, std::slice::from_ref(row));
        }
    }

    pub fn encode(&self, ring: &Ring) -> Vec<u8> {
        let mut out = Vec::new();
        self.write(&mut out, ring);
        out
    }

    pub fn read(r: &mut Reader, ring: &Ring, kappa: usize) -> Result<Self, WireError> {
        let c0 = r.polys(ring, Some(kappa))?;
        let mut row = || r.polys(ring, Some(1)).map(|mut v| v.pop().unwrap());
        Ok(Commitment { c0, c1: row()?, c2: row()?, c3: row()? })
    }
}

pub fn sum_commitments<'a, I>(pp: &PublicParams, coms: I) -> Commitment
where
    I: IntoIterator<Item = &'a Commitment>,
{
    coms.into_iter().fold(Commitment::zero(pp), |acc, c| acc.add(&pp.ring, c))
}

/// `com_{t,a,i}` for message `(v, sqrt(q) v, v)` under randomness `r`.
pub fn commit_tx(
    pp: &PublicParams,
    pk: &PublicKey,
    v: &Poly,
    r: &[Poly],
) -> Result<Commitment, CommitError> {
    let ring = &pp.ring;
    if r.len() != pp.params.n_rand() || pk.pk1.len() != r.len() || pk.pk2.len() != r.len() {
        return Err(CommitError::Dimension("randomness or key length"));
    }
    let rn = NttVec::from_polys(ring, r);
    let (p1, p2) = pk.rows(ring);
    let sv = ring.scale(v, pp.sqrt_q_residue());
    Ok(Commitment {
        c0: pp.a.mul_ntt(ring, &rn),
        c1: ring.add(&p1.dot(ring, &rn), v),
        c2: ring.add(&p2.dot(ring, &rn), &sv),
        c3: ring.add(&pp.b.mul_ntt(ring, &rn)[0], v),
    })
}

/// BDLOP: `(A r, b_i^T r + m_i)`.
pub fn commit_bdlop(
    ring: &Ring,
    a: &Mat,
    b: &Mat,
    r: &[Poly],
    msgs: &[Poly],
) -> Result<(Vec<Poly>, Vec<Poly>), CommitError> {
    if r.len() != a.cols || b.cols != a.cols || msgs.len() != b.rows {
        return Err(CommitError::Dimension("bdlop shape"));
    }
    let rn = NttVec::from_polys(ring, r);
    Ok((a.mul_ntt(ring, &rn), vec_add(ring, &b.mul_ntt(ring, &rn), msgs)))
}

/// ABDLOP: `(A1 r + A2 s, b_i^T s + m_i)`.
pub fn commit_abdlop(
    ring: &Ring,
    a1: &Mat,
    a2: &Mat,
    b: &Mat,
    r: &[Poly],
    s: &[Poly],
    msgs: &[Poly],
) -> Result<(Vec<Poly>, Vec<Poly>), CommitError> {
    if r.len() != a1.cols || s.len() != a2.cols || a1.rows != a2.rows || b.cols != a2.cols {
        return Err(CommitError::Dimension("abdlop shape"));
    }
    if msgs.len() != b.rows {
        return Err(CommitError::Dimension("abdlop message count"));
    }
    let com0 = vec_add(ring, &a1.mul_vec(ring, r), &a2.mul_vec(ring, s));
    Ok((com0, vec_add(ring, &b.mul_vec(ring, s), msgs)))
}

/// Centered remainder for any positive modulus, in `(-m/2, m/2]`.
fn mod_center(x: i128, m: i128) -> i128 {
    let mut k = x.rem_euclid(m);
    if k > m / 2 {
        k -= m;
    }
    k
}

/// Recovers `v` from a transaction commitment with the owner's secret key.
///
/// Each coefficient is decoded as `(x2 + k) / sqrt(q)` with
/// `k = (sqrt(q) x1 - x2) mod+- sqrt(q)`. The result is accepted only if the
/// implied noise terms `x1 - v` and `-k` are both well inside their budgets;
/// otherwise the rows were not formed with a short `r`.
pub fn extract(pp: &PublicParams, sk: &SecretKey, com: &Commitment) -> Result<Poly, CommitError> {
    let ring = &pp.ring;
    let md = &ring.md;
    let q = ring.q();
    if com.c0.len() != sk.s1.len() {
        return Err(CommitError::Dimension("com0 length"));
    }
    let s1n = NttVec::from_polys(ring, &sk.s1);
    let s2n = NttVec::from_polys(ring, &sk.s2);
    let x1 = ring.sub(&com.c1, &s1n.dot_polys(ring, &com.c0));
    let x2 = ring.sub(&com.c2, &s2n.dot_polys(ring, &com.c0));
    let sq = pp.sqrt_q;
    let sq_res = pp.sqrt_q_residue();
    let sq_inv = md.inv(sq_res);
    let sqi = sq as i128;
    let mut v = Vec::with_capacity(ring.d);
    for j in 0..ring.d {
        let dj = md.centered(md.sub(md.mul(sq_res, x1.0[j]), x2.0[j]));
        let k = mod_center(dj, sqi);
        let vj = md.mul(md.add(x2.0[j], md.from_i128(k)), sq_inv);
        let n1 = md.centered(md.sub(x1.0[j], vj));
        let consistent = dj - k == sqi * n1;
        let within = n1.abs() <= sqi / 4 && 2 * k.abs() < sqi;
        if !(consistent && within) {
            return Err(CommitError::Extraction(j));
        }
        v.push(vj);
    }
    debug_assert!(v.iter().all(|&c| c < q));
    Ok(Poly(v))
}

/// Extracts a constant-polynomial value as a signed integer.
pub fn extract_value(pp: &PublicParams, sk: &SecretKey, com: &Commitment) -> Result<i128, CommitError> {
    let v = extract(pp, sk, com)?;
    if v.0[1..].iter().any(|&c| c != 0) {
        return Err(CommitError::NotConstant);
    }
    Ok(pp.ring.md.centered(v.0[0]))
}

/// Decryption residuals `(||x1 - v||_inf, ||x2 - sqrt(q) v||_inf)` for a
/// candidate value. Both stay far below `sqrt(q)/4` only for the committed `v`.
pub fn decryption_residuals(
    pp: &PublicParams,
    sk: &SecretKey,
    com: &Commitment,
    v: &Poly,
) -> (u128, u128) {
    let ring = &pp.ring;
    let s1n = NttVec::from_polys(ring, &sk.s1);
    let s2n = NttVec::from_polys(ring, &sk.s2);
    let x1 = ring.sub(&ring.sub(&com.c1, &s1n.dot_polys(ring, &com.c0)), v);
    let x2 = ring.sub(
        &ring.sub(&com.c2, &s2n.dot_polys(ring, &com.c0)),
        &ring.scale(v, pp.sqrt_q_residue()),
    );
    (ring.norm_inf(&[x1]), ring.norm_inf(&[x2]))
}

/// Which bullet of a weak opening failed.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeakOpeningError {
    #[error("challenge difference exceeds l1 bound 2 omega")]
    ChallengeNorm,
    #[error("challenge difference not invertible")]
    NotInvertible,
    #[error("scaled randomness exceeds its norm bound")]
    RandomnessNorm,
    #[error("Ajtai row does not reconstruct com0")]
    Com0,
    #[error("message row {0} does not reconstruct")]
    Message(usize),
}

fn check_cbar(ring: &Ring, omega: usize, cbar: &Poly) -> Result<(), WeakOpeningError> {
    if ring.norms(cbar).l1 > 2 * omega as u128 {
        return Err(WeakOpeningError::ChallengeNorm);
    }
    if !ring.is_invertible(cbar) {
        return Err(WeakOpeningError::NotInvertible);
    }
    Ok(())
}

fn scaled_norm_sq(ring: &Ring, cbar: &Poly, v: &[Poly]) -> u128 {
    let sc: Vec<Poly> = v.iter().map(|x| ring.mul(cbar, x)).collect();
    ring.norm_sq(&sc)
}

/// Weak BDLOP opening `(cbar, r*, m*)`; `beta_sq` is the squared verifier
/// bound `s^2 * 2 (kappa + lambda + n) d`, so the check is `||cbar r*|| <= 2 beta`.
#[allow(clippy::too_many_arguments)]
pub fn check_weak_opening_bdlop(
    ring: &Ring,
    omega: usize,
    a: &Mat,
    b: &Mat,
    com0: &[Poly],
    coms: &[Poly],
    cbar: &Poly,
    r_star: &[Poly],
    m_star: &[Poly],
    beta_sq: u128,
) -> Result<(), WeakOpeningError> {
    check_cbar(ring, omega, cbar)?;
    if scaled_norm_sq(ring, cbar, r_star) > beta_sq.saturating_mul(4) {
        return Err(WeakOpeningError::RandomnessNorm);
    }
    if a.mul_vec(ring, r_star) != com0 {
        return Err(WeakOpeningError::Com0);
    }
    let br = b.mul_vec(ring, r_star);
    for (i, ((x, m), c)) in br.iter().zip(m_star).zip(coms).enumerate() {
        if &ring.add(x, m) != c {
            return Err(WeakOpeningError::Message(i));
        }
    }
    Ok(())
}

/// Weak ABDLOP opening `(cbar, r*, s*, m*)` with squared bounds for each part.
#[allow(clippy::too_many_arguments)]
pub fn check_weak_opening_abdlop(
    ring: &Ring,
    omega: usize,
    a1: &Mat,
    a2: &Mat,
    b: &Mat,
    com0: &[Poly],
    coms: &[Poly],
    cbar: &Poly,
    r_star: &[Poly],
    s_star: &[Poly],
    m_star: &[Poly],
    beta_sq: (u128, u128),
) -> Result<(), WeakOpeningError> {
    check_cbar(ring, omega, cbar)?;
    if scaled_norm_sq(ring, cbar, r_star) > beta_sq.0.saturating_mul(4)
        || scaled_norm_sq(ring, cbar, s_star) > beta_sq.1.saturating_mul(4)
    {
        return Err(WeakOpeningError::RandomnessNorm);
    }
    if vec_add(ring, &a1.mul_vec(ring, r_star), &a2.mul_vec(ring, s_star)) != com0 {
        return Err(WeakOpeningError::Com0);
    }
    let bs = b.mul_vec(ring, s_star);
    for (i, ((x, m), c)) in bs.iter().zip(m_star).zip(coms).enumerate() {
        if &ring.add(x, m) != c {
            return Err(WeakOpeningError::Message(i));
        }
    }
    Ok(())
}

/// Centered `mod+-` of a residue against `q`, kept for callers that reason
/// about decryption noise on the integers.
pub fn centered_noise(ring: &Ring, x: u128) -> i128 {
    mod_pm(ring.md.centered(x), ring.q())
}

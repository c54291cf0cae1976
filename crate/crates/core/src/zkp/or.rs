//! One-out-of-two composition of PoE and PoE2.
//!
//! Only the final challenge is split. Everything a branch sends before it
//! (including PoE's inner projection round) is part of that branch's first
//! message. With `H` the hash of both first messages, the branch seeds satisfy
//! `seed_poe xor seed_poe2 = H`; the prover fixes the fake branch's seed in
//! advance and simulates it, then answers the real branch honestly.

use rand::RngCore;

use super::common::*;
use super::eq::{self, Core, EqFirst, PoeStatement};
use super::poe2::{self, Poe2First, Poe2Statement};
use crate::commit::{PublicParams, SecretKey};
use crate::ring::Poly;
use crate::transcript::Transcript;
use crate::wire::{self, Reader};

const KIND: ProofKind = ProofKind::Or;

pub struct OrStatement<'a> {
    pub poe: PoeStatement<'a>,
    pub poe2: Poe2Statement<'a>,
}

pub enum OrWitness<'a> {
    /// Spender: owner's secret key for the equivalence branch.
    Poe { sk: &'a SecretKey },
    /// Receiver or decoy: both randomness vectors of the recommitment.
    Poe2 { r: &'a [Poly], r2: &'a [Poly] },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrProof {
    pub eq: EqFirst,
    pub eq_z1: Vec<Poly>,
    pub eq_z2: Vec<Poly>,
    pub e2: Poe2First,
    pub e2_z: Vec<Poly>,
    pub e2_z2: Vec<Poly>,
    /// Challenge seed of the PoE branch; the PoE2 seed is `H xor seed`.
    pub seed: [u8; 32],
}

fn outer(pp: &PublicParams, ctx: &[u8], core: &Core, st: &OrStatement) -> Transcript {
    let mut t = transcript(KIND, ctx);
    core.absorb(&mut t, &pp.ring);
    st.poe2.absorb(&mut t, &pp.ring);
    t
}

fn branch(outer: &Transcript) -> Transcript {
    let mut t = outer.clone();
    t.absorb("branch", b"poe");
    t
}

fn split(pp: &PublicParams, outer: &Transcript, eqf: &EqFirst, e2f: &Poe2First) -> [u8; 32] {
    let mut t = outer.clone();
    eqf.absorb_all(&mut t, &pp.ring);
    e2f.absorb(&mut t, &pp.ring);
    t.challenge_seed("split")
}

fn xor(a: [u8; 32], b: [u8; 32]) -> [u8; 32] {
    std::array::from_fn(|i| a[i] ^ b[i])
}

pub fn prove_or<R: RngCore + ?Sized>(
    pp: &PublicParams,
    ctx: &[u8],
    st: &OrStatement,
    wit: &OrWitness,
    rng: &mut R,
    opts: &ProveOptions,
) -> Result<OrProof, ProofError> {
    let (ring, p) = pp_ring(pp);
    let core = Core::poe(pp, &st.poe);
    let base = outer(pp, ctx, &core, st);
    let m = match wit {
        OrWitness::Poe { sk } => {
            let m = sk.witness();
            if m.len() != p.m_len() {
                return Err(shape(KIND, "secret key length"));
            }
            m
        }
        OrWitness::Poe2 { r, r2 } => {
            if r.len() != p.n_rand() || r2.len() != p.n_rand() {
                return Err(shape(KIND, "randomness length"));
            }
            vec![]
        }
    };
    with_restarts(KIND, opts, || {
        let mut t_eq = branch(&base);
        let mut fake = [0u8; 32];
        rng.fill_bytes(&mut fake);
        match wit {
            OrWitness::Poe { .. } => {
                let Some((eqf, masks)) = eq::first(pp, &core, &mut t_eq, &m, rng, opts) else {
                    return Ok(None);
                };
                let c2 = challenge_from_seed(fake, ring, p);
                let (e2f, z, z2) = poe2::simulate(pp, &st.poe2, &c2, rng);
                let seed = xor(split(pp, &base, &eqf, &e2f), fake);
                let c1 = challenge_from_seed(seed, ring, p);
                let Some((z1, z1b)) = eq::respond(pp, &core, &masks, &m, &c1, rng, opts) else {
                    return Ok(None);
                };
                Ok(Some(OrProof { eq: eqf, eq_z1: z1, eq_z2: z1b, e2: e2f, e2_z: z, e2_z2: z2, seed }))
            }
            OrWitness::Poe2 { r, r2 } => {
                let c1 = challenge_from_seed(fake, ring, p);
                let (eqf, z1, z1b) = eq::simulate(pp, &core, &mut t_eq, &c1, rng);
                let (e2f, masks) = poe2::first(pp, &st.poe2, rng);
                let seed2 = xor(split(pp, &base, &eqf, &e2f), fake);
                let c2 = challenge_from_seed(seed2, ring, p);
                let Some((z, z2)) = poe2::respond(pp, &masks, &c2, r, r2, rng, opts) else {
                    return Ok(None);
                };
                Ok(Some(OrProof { eq: eqf, eq_z1: z1, eq_z2: z1b, e2: e2f, e2_z: z, e2_z2: z2, seed: fake }))
            }
        }
    })
}

pub fn verify_or(pp: &PublicParams, ctx: &[u8], st: &OrStatement, pf: &OrProof) -> Result<(), ProofError> {
    let (ring, p) = pp_ring(pp);
    let core = Core::poe(pp, &st.poe);
    eq::check_dims(p, ProofKind::PoE, &pf.eq, &pf.eq_z1, &pf.eq_z2)?;
    let base = outer(pp, ctx, &core, st);
    let mut t_eq = branch(&base);
    let fun = eq::derive(pp, &core, &mut t_eq, &pf.eq);
    let seed2 = xor(split(pp, &base, &pf.eq, &pf.e2), pf.seed);
    let c1 = challenge_from_seed(pf.seed, ring, p);
    let c2 = challenge_from_seed(seed2, ring, p);
    eq::check(pp, &core, &fun, &pf.eq, &c1, &pf.eq_z1, &pf.eq_z2)?;
    poe2::check(pp, &st.poe2, &pf.e2, &c2, &pf.e2_z, &pf.e2_z2)
}

/// A cheating prover without any witness: simulates both branches under
/// independently chosen seeds and hopes they XOR to `H`.
pub fn forge_or<R: RngCore + ?Sized>(
    pp: &PublicParams,
    ctx: &[u8],
    st: &OrStatement,
    rng: &mut R,
) -> OrProof {
    let (ring, p) = pp_ring(pp);
    let core = Core::poe(pp, &st.poe);
    let base = outer(pp, ctx, &core, st);
    let mut t_eq = branch(&base);
    let mut s1 = [0u8; 32];
    let mut s2 = [0u8; 32];
    rng.fill_bytes(&mut s1);
    rng.fill_bytes(&mut s2);
    let (eqf, z1, z1b) = eq::simulate(pp, &core, &mut t_eq, &challenge_from_seed(s1, ring, p), rng);
    let (e2f, z, z2) = poe2::simulate(pp, &st.poe2, &challenge_from_seed(s2, ring, p), rng);
    OrProof { eq: eqf, eq_z1: z1, eq_z2: z1b, e2: e2f, e2_z: z, e2_z2: z2, seed: s1 }
}

impl OrProof {
    pub fn encode(&self, pp: &PublicParams) -> Vec<u8> {
        let ring = &pp.ring;
        let mut out = header(KIND);
        self.eq.write(&mut out, ring);
        eq::write_responses(&mut out, ring, &self.eq_z1, &self.eq_z2);
        self.e2.write(&mut out, ring);
        wire::put_short_polys(&mut out, ring, &self.e2_z);
        wire::put_short_polys(&mut out, ring, &self.e2_z2);
        out.extend_from_slice(&self.seed);
        out
    }

    pub fn decode(pp: &PublicParams, bytes: &[u8]) -> Result<Self, ProofError> {
        let (ring, p) = pp_ring(pp);
        let go = || {
            let mut r = Reader::new(bytes);
            read_header(&mut r, KIND)?;
            let eq = EqFirst::read(&mut r, pp)?;
            let (eq_z1, eq_z2) = eq::read_responses(&mut r, pp)?;
            let e2 = Poe2First::read(&mut r, pp)?;
            let e2_z = r.short_polys(ring, Some(p.n_rand()))?;
            let e2_z2 = r.short_polys(ring, Some(p.n_rand()))?;
            let seed = r.array32()?;
            r.finish()?;
            Ok(OrProof { eq, eq_z1, eq_z2, e2, e2_z, e2_z2, seed })
        };
        go().map_err(enc_err(KIND))
    }
}

//! Message equality of two transaction commitments under the same key rows.
//!
//! ```text
//! P: y, y' <- D^N, w = A y, w' = A y', u_i = b_i^T (y - y')     V: c
//! P: z = y + c r, z' = y' + c r'
//! V: norms, A z = w + c com0, A z' = w' + c com0',
//!    b_i^T (z - z') = c (com_i - com_i') + u_i   for b = (pk1, pk2, B)
//! ```

use rand::RngCore;

use super::common::*;
use crate::commit::{Commitment, PublicKey, PublicParams};
use crate::ring::{vec::vec_add, vec::vec_sub, NttVec, Poly, Ring};
use crate::transcript::Transcript;
use crate::wire::{self, Reader};

const KIND: ProofKind = ProofKind::PoE2;

pub const CHECK_NORM: &str = "(a) ||z||, ||z'|| bounds";
pub const CHECK_AJTAI: &str = "(b) A z = w + c com0";
pub const CHECK_AJTAI2: &str = "(c) A z' = w' + c com0'";
pub const CHECK_CROSS: &str = "(d) b_i^T (z - z') = c (com_i - com_i') + u_i";

pub struct Poe2Statement<'a> {
    pub pk: &'a PublicKey,
    pub com: &'a Commitment,
    pub com2: &'a Commitment,
}

/// First move.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poe2First {
    pub w: Vec<Poly>,
    pub w2: Vec<Poly>,
    pub u: Vec<Poly>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poe2Proof {
    pub first: Poe2First,
    pub z: Vec<Poly>,
    pub z2: Vec<Poly>,
}

pub struct Poe2Masks {
    y: Vec<Poly>,
    y2: Vec<Poly>,
}

fn rows(ring: &Ring, pp: &PublicParams, pk: &PublicKey) -> [NttVec; 3] {
    let (p1, p2) = pk.rows(ring);
    [p1, p2, pp.b.row(0)]
}

impl Poe2Statement<'_> {
    pub(crate) fn absorb(&self, t: &mut Transcript, ring: &Ring) {
        absorb_pk(t, ring, self.pk);
        absorb_com(t, "com", ring, self.com);
        absorb_com(t, "com'", ring, self.com2);
    }
}

impl Poe2First {
    pub(crate) fn absorb(&self, t: &mut Transcript, ring: &Ring) {
        t.absorb_polys("w", ring, &self.w);
        t.absorb_polys("w'", ring, &self.w2);
        t.absorb_polys("u", ring, &self.u);
    }

    pub(crate) fn write(&self, out: &mut Vec<u8>, ring: &Ring) {
        wire::put_polys(out, ring, &self.w);
        wire::put_polys(out, ring, &self.w2);
        wire::put_polys(out, ring, &self.u);
    }

    pub(crate) fn read(r: &mut Reader, pp: &PublicParams) -> Result<Self, crate::wire::WireError> {
        let (ring, p) = pp_ring(pp);
        Ok(Poe2First {
            w: r.polys(ring, Some(p.kappa))?,
            w2: r.polys(ring, Some(p.kappa))?,
            u: r.polys(ring, Some(3))?,
        })
    }
}

pub(crate) fn first<R: RngCore + ?Sized>(
    pp: &PublicParams,
    st: &Poe2Statement,
    rng: &mut R,
) -> (Poe2First, Poe2Masks) {
    let (ring, p) = pp_ring(pp);
    let s2 = p.sigma_sq.poe2.sq[0];
    let y = mask(ring, rng, s2, p.n_rand());
    let y2 = mask(ring, rng, s2, p.n_rand());
    let dy = NttVec::from_polys(ring, &vec_sub(ring, &y, &y2));
    let u = rows(ring, pp, st.pk).iter().map(|b| b.dot(ring, &dy)).collect();
    let f = Poe2First { w: pp.a.mul_vec(ring, &y), w2: pp.a.mul_vec(ring, &y2), u };
    (f, Poe2Masks { y, y2 })
}

/// Responses; `None` when rejection sampling aborts.
pub(crate) fn respond<R: RngCore + ?Sized>(
    pp: &PublicParams,
    masks: &Poe2Masks,
    c: &Poly,
    r: &[Poly],
    r2: &[Poly],
    rng: &mut R,
    opts: &ProveOptions,
) -> Option<(Vec<Poly>, Vec<Poly>)> {
    let (ring, p) = pp_ring(pp);
    let s2 = p.sigma_sq.poe2.sq[0];
    let cr = cmul(ring, c, r);
    let cr2 = cmul(ring, c, r2);
    let z = vec_add(ring, &masks.y, &cr);
    let z2 = vec_add(ring, &masks.y2, &cr2);
    let ok = rej_polys(ring, rng, opts, &z, &cr, s2, p.rej_m)
        && rej_polys(ring, rng, opts, &z2, &cr2, s2, p.rej_m);
    ok.then_some((z, z2))
}

/// Picks the responses first and solves for the first move.
pub(crate) fn simulate<R: RngCore + ?Sized>(
    pp: &PublicParams,
    st: &Poe2Statement,
    c: &Poly,
    rng: &mut R,
) -> (Poe2First, Vec<Poly>, Vec<Poly>) {
    let (ring, p) = pp_ring(pp);
    let s2 = p.sigma_sq.poe2.sq[0];
    let z = mask(ring, rng, s2, p.n_rand());
    let z2 = mask(ring, rng, s2, p.n_rand());
    let w = vec_sub(ring, &pp.a.mul_vec(ring, &z), &cmul(ring, c, &st.com.c0));
    let w2 = vec_sub(ring, &pp.a.mul_vec(ring, &z2), &cmul(ring, c, &st.com2.c0));
    let dz = NttVec::from_polys(ring, &vec_sub(ring, &z, &z2));
    let diff = st.com.sub(ring, st.com2);
    let u = rows(ring, pp, st.pk)
        .iter()
        .zip(diff.msg_rows())
        .map(|(b, d)| ring.sub(&b.dot(ring, &dz), &ring.mul(c, d)))
        .collect();
    (Poe2First { w, w2, u }, z, z2)
}

pub(crate) fn check(
    pp: &PublicParams,
    st: &Poe2Statement,
    f: &Poe2First,
    c: &Poly,
    z: &[Poly],
    z2: &[Poly],
) -> Result<(), ProofError> {
    let (ring, p) = pp_ring(pp);
    let s2 = p.sigma_sq.poe2.sq[0];
    if z.len() != p.n_rand() || z2.len() != p.n_rand() {
        return Err(shape(KIND, "response length"));
    }
    if !l2_ok(ring, z, s2) || !l2_ok(ring, z2, s2) {
        return Err(fail(KIND, CHECK_NORM));
    }
    if pp.a.mul_vec(ring, z) != vec_add(ring, &f.w, &cmul(ring, c, &st.com.c0)) {
        return Err(fail(KIND, CHECK_AJTAI));
    }
    if pp.a.mul_vec(ring, z2) != vec_add(ring, &f.w2, &cmul(ring, c, &st.com2.c0)) {
        return Err(fail(KIND, CHECK_AJTAI2));
    }
    let dz = NttVec::from_polys(ring, &vec_sub(ring, z, z2));
    let diff = st.com.sub(ring, st.com2);
    for ((b, d), u) in rows(ring, pp, st.pk).iter().zip(diff.msg_rows()).zip(&f.u) {
        if b.dot(ring, &dz) != ring.add(&ring.mul(c, d), u) {
            return Err(fail(KIND, CHECK_CROSS));
        }
    }
    Ok(())
}

fn fs_challenge(pp: &PublicParams, ctx: &[u8], st: &Poe2Statement, f: &Poe2First) -> Poly {
    let ring = &pp.ring;
    let mut t = transcript(KIND, ctx);
    st.absorb(&mut t, ring);
    f.absorb(&mut t, ring);
    challenge(&mut t, ring, &pp.params)
}

pub fn prove_poe2<R: RngCore + ?Sized>(
    pp: &PublicParams,
    ctx: &[u8],
    st: &Poe2Statement,
    r: &[Poly],
    r2: &[Poly],
    rng: &mut R,
    opts: &ProveOptions,
) -> Result<Poe2Proof, ProofError> {
    let n = pp.params.n_rand();
    if r.len() != n || r2.len() != n {
        return Err(shape(KIND, "randomness length"));
    }
    with_restarts(KIND, opts, || {
        let (f, masks) = first(pp, st, rng);
        let c = fs_challenge(pp, ctx, st, &f);
        Ok(respond(pp, &masks, &c, r, r2, rng, opts).map(|(z, z2)| Poe2Proof { first: f, z, z2 }))
    })
}

pub fn verify_poe2(
    pp: &PublicParams,
    ctx: &[u8],
    st: &Poe2Statement,
    proof: &Poe2Proof,
) -> Result<(), ProofError> {
    let c = fs_challenge(pp, ctx, st, &proof.first);
    check(pp, st, &proof.first, &c, &proof.z, &proof.z2)
}

/// Simulated transcript with a caller-chosen challenge, for zero-knowledge checks.
pub fn simulate_poe2<R: RngCore + ?Sized>(
    pp: &PublicParams,
    st: &Poe2Statement,
    c: &Poly,
    rng: &mut R,
) -> (Poe2Proof, Result<(), ProofError>) {
    let (f, z, z2) = simulate(pp, st, c, rng);
    let ok = check(pp, st, &f, c, &z, &z2);
    (Poe2Proof { first: f, z, z2 }, ok)
}

impl Poe2Proof {
    pub fn encode(&self, pp: &PublicParams) -> Vec<u8> {
        let ring = &pp.ring;
        let mut out = header(KIND);
        self.first.write(&mut out, ring);
        wire::put_short_polys(&mut out, ring, &self.z);
        wire::put_short_polys(&mut out, ring, &self.z2);
        out
    }

    pub fn decode(pp: &PublicParams, bytes: &[u8]) -> Result<Self, ProofError> {
        let (ring, p) = pp_ring(pp);
        let go = || {
            let mut r = Reader::new(bytes);
            read_header(&mut r, KIND)?;
            let first = Poe2First::read(&mut r, pp)?;
            let z = r.short_polys(ring, Some(p.n_rand()))?;
            let z2 = r.short_polys(ring, Some(p.n_rand()))?;
            r.finish()?;
            Ok(Poe2Proof { first, z, z2 })
        };
        go().map_err(enc_err(KIND))
    }
}

//! Range: a committed constant `v_tot` lies in `[0, 2^value_bits)`.
//!
//! The bits of `v_tot` sit in the NTT slots of `v_bin` (slot `j` holds bit
//! `j`). A product proof shows `v_bin (1 - v_bin) = 0`, so every slot is a
//! bit, and a garbage term `h` whose first `d/l` coefficients vanish shows
//! `sum_j 2^j bit_j = v_tot`, because averaging NTT slots reads off those
//! coefficients.

use rand::RngCore;

use super::common::*;
use crate::commit::{Commitment, PublicKey, PublicParams};
use crate::ring::{vec::vec_add, NttVec, NttVector, Poly, Ring};
use crate::transcript::Transcript;
use crate::wire::{self, Reader};

const KIND: ProofKind = ProofKind::PoA;

pub const CHECK_NORM: &str = "(a) ||z|| bound";
pub const CHECK_OPEN: &str = "(b) A z = w + c com0";
pub const CHECK_BINARY: &str = "(c) v_bin (v_bin - 1) = 0";
pub const CHECK_LINEAR: &str = "(d) bit reconstruction relation";
pub const CHECK_H: &str = "(e) first d/l coefficients of h are 0";

pub struct PoaStatement<'a> {
    pub pk: &'a PublicKey,
    pub com: &'a Commitment,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoaProof {
    pub f1: Poly,
    pub u1: Poly,
    pub u2: Poly,
    pub u3: Poly,
    pub w: Vec<Poly>,
    pub h: Poly,
    pub u4: Poly,
    pub z: Vec<Poly>,
}

/// Bits of `v` (two's complement, truncated) as slot values.
pub fn bit_slots(p: &crate::params::ParamSet, v: i128) -> Vec<u128> {
    (0..p.value_bits).map(|j| ((v >> j) & 1) as u128).collect()
}

/// `v_bin` with `slots[j]` as the constant of NTT slot `j`.
fn v_bin(ring: &Ring, slots: &[u128]) -> Poly {
    let mut nv = NttVector { slots: vec![vec![0u128; ring.m]; ring.l] };
    for (j, &b) in slots.iter().enumerate() {
        nv.slots[j][0] = b;
    }
    ring.from_slots(&nv)
}

/// `(Phi, Phi_Q)` from the challenge `phi`.
fn phis(ring: &Ring, vb: usize, phi: &[u128]) -> (Poly, Poly) {
    let md = &ring.md;
    let slots: Vec<Vec<u128>> = phi.chunks(ring.m).map(|c| c.to_vec()).collect();
    let mut sum = vec![0u128; ring.m];
    for s in &slots {
        for (a, &b) in sum.iter_mut().zip(s) {
            *a = md.add(*a, b);
        }
    }
    let mut q = vec![vec![0u128; ring.m]; ring.l];
    let mut pow = 1u128;
    for slot in q.iter_mut().take(vb) {
        *slot = sum.iter().map(|&x| md.mul(x, pow)).collect();
        pow = md.add(pow, pow);
    }
    (ring.from_slots(&NttVector { slots }), ring.from_slots(&NttVector { slots: q }))
}

fn start(pp: &PublicParams, ctx: &[u8], st: &PoaStatement) -> Transcript {
    let ring = &pp.ring;
    let mut t = transcript(KIND, ctx);
    absorb_pk(&mut t, ring, st.pk);
    absorb_com(&mut t, "com", ring, st.com);
    t
}

fn derive_phi(t: &mut Transcript, ring: &Ring, pf: (&Poly, &Poly, &Poly, &Poly, &[Poly])) -> Vec<u128> {
    let (f1, u1, u2, u3, w) = pf;
    t.absorb_polys("f1", ring, std::slice::from_ref(f1));
    t.absorb_polys("u1", ring, std::slice::from_ref(u1));
    t.absorb_polys("u2", ring, std::slice::from_ref(u2));
    t.absorb_polys("u3", ring, std::slice::from_ref(u3));
    t.absorb_polys("w", ring, w);
    scalars(t, "phi", ring.q(), ring.d)
}

fn derive_c(t: &mut Transcript, pp: &PublicParams, h: &Poly, u4: &Poly) -> Poly {
    let ring = &pp.ring;
    t.absorb_polys("h", ring, std::slice::from_ref(h));
    t.absorb_polys("u4", ring, std::slice::from_ref(u4));
    challenge(t, ring, &pp.params)
}

pub fn prove_poa<R: RngCore + ?Sized>(
    pp: &PublicParams,
    ctx: &[u8],
    st: &PoaStatement,
    r: &[Poly],
    v_tot: i128,
    rng: &mut R,
    opts: &ProveOptions,
) -> Result<PoaProof, ProofError> {
    prove_poa_slots(pp, ctx, st, r, v_tot, &bit_slots(&pp.params, v_tot), rng, opts)
}

/// As `prove_poa` with caller-chosen slot values instead of the bits of `v_tot`.
#[allow(clippy::too_many_arguments)]
pub fn prove_poa_slots<R: RngCore + ?Sized>(
    pp: &PublicParams,
    ctx: &[u8],
    st: &PoaStatement,
    r: &[Poly],
    v_tot: i128,
    slots: &[u128],
    rng: &mut R,
    opts: &ProveOptions,
) -> Result<PoaProof, ProofError> {
    let (ring, p) = pp_ring(pp);
    if r.len() != p.n_rand() || slots.len() != p.value_bits as usize {
        return Err(shape(KIND, "randomness or bit count"));
    }
    let sigma_sq = p.sigma_sq.poa.sq[0];
    let vb = v_bin(ring, slots);
    let vt = ring.constant(ring.md.from_i128(v_tot));
    let one = ring.one();
    let (p1, _) = st.pk.rows(ring);
    with_restarts(KIND, opts, || {
        let mut t = start(pp, ctx, st);
        let y = mask(ring, rng, sigma_sq, p.n_rand());
        let (rn, yn) = (NttVec::from_polys(ring, r), NttVec::from_polys(ring, &y));
        let f1 = ring.add(&pp.a_bin.mul_ntt(ring, &rn)[0], &vb);
        let alpha = pp.a_bin.mul_ntt(ring, &yn).pop().unwrap();
        let one_m2v = ring.sub(&one, &ring.add(&vb, &vb));
        let u1 = ring.add(&pp.a_bin2.mul_ntt(ring, &rn)[0], &ring.mul(&alpha, &one_m2v));
        let g = garbage_mask(ring, rng, ring.m, opts.fault);
        let u2 = ring.add(&pp.a_g.mul_ntt(ring, &rn)[0], &g);
        let u3 = ring.add(&ring.mul(&alpha, &alpha), &pp.a_bin2.mul_ntt(ring, &yn)[0]);
        let w = pp.a.mul_ntt(ring, &yn);
        let phi = derive_phi(&mut t, ring, (&f1, &u1, &u2, &u3, &w));
        let (ph, phq) = phis(ring, p.value_bits as usize, &phi);
        let u4 = ring.sub(
            &ring.add(&pp.a_g.mul_ntt(ring, &yn)[0], &ring.mul(&phq, &alpha)),
            &ring.mul(&ph, &p1.dot(ring, &yn)),
        );
        let mut h = ring.add(&ring.sub(&ring.mul(&vb, &phq), &ring.mul(&vt, &ph)), &g);
        apply_h_fault(&mut h, ring.m, opts.fault);
        let c = derive_c(&mut t, pp, &h, &u4);
        let cr = cmul(ring, &c, r);
        let z = vec_add(ring, &y, &cr);
        if !rej_polys(ring, rng, opts, &z, &cr, sigma_sq, p.rej_m) {
            return Ok(None);
        }
        Ok(Some(PoaProof { f1, u1, u2, u3, w, h, u4, z }))
    })
}

pub fn verify_poa(pp: &PublicParams, ctx: &[u8], st: &PoaStatement, pf: &PoaProof) -> Result<(), ProofError> {
    let (ring, p) = pp_ring(pp);
    if pf.z.len() != p.n_rand() || pf.w.len() != p.kappa {
        return Err(shape(KIND, "proof dimensions"));
    }
    let mut t = start(pp, ctx, st);
    let phi = derive_phi(&mut t, ring, (&pf.f1, &pf.u1, &pf.u2, &pf.u3, &pf.w));
    let (ph, phq) = phis(ring, p.value_bits as usize, &phi);
    let c = derive_c(&mut t, pp, &pf.h, &pf.u4);

    if !l2_ok(ring, &pf.z, p.sigma_sq.poa.sq[0]) {
        return Err(fail(KIND, CHECK_NORM));
    }
    let zn = NttVec::from_polys(ring, &pf.z);
    if pp.a.mul_ntt(ring, &zn) != vec_add(ring, &pf.w, &cmul(ring, &c, &st.com.c0)) {
        return Err(fail(KIND, CHECK_OPEN));
    }
    let bz = pp.a_bin.mul_ntt(ring, &zn).pop().unwrap();
    let e = ring.sub(&bz, &ring.mul(&c, &pf.f1));
    let prod = ring.mul(&e, &ring.add(&e, &c));
    let lhs = ring.sub(
        &ring.sub(&ring.add(&prod, &pp.a_bin2.mul_ntt(ring, &zn)[0]), &ring.mul(&c, &pf.u1)),
        &pf.u3,
    );
    if lhs != ring.zero() {
        return Err(fail(KIND, CHECK_BINARY));
    }
    let (p1, _) = st.pk.rows(ring);
    let inner = ring.sub(
        &ring.add(&ring.sub(&ring.mul(&phq, &pf.f1), &ring.mul(&ph, &st.com.c1)), &pf.u2),
        &pf.h,
    );
    let left = ring.add(&ring.mul(&c, &inner), &pf.u4);
    let right = ring.sub(
        &ring.add(&pp.a_g.mul_ntt(ring, &zn)[0], &ring.mul(&phq, &bz)),
        &ring.mul(&ph, &p1.dot(ring, &zn)),
    );
    if left != right {
        return Err(fail(KIND, CHECK_LINEAR));
    }
    if pf.h.0[..ring.m].iter().any(|&x| x != 0) {
        return Err(fail(KIND, CHECK_H));
    }
    Ok(())
}

impl PoaProof {
    pub fn encode(&self, pp: &PublicParams) -> Vec<u8> {
        let ring = &pp.ring;
        let mut out = header(KIND);
        for x in [&self.f1, &self.u1, &self.u2, &self.u3] {
            wire::put_polys(&mut out, ring, std::slice::from_ref(x));
        }
        wire::put_polys(&mut out, ring, &self.w);
        wire::put_polys(&mut out, ring, std::slice::from_ref(&self.h));
        wire::put_polys(&mut out, ring, std::slice::from_ref(&self.u4));
        wire::put_short_polys(&mut out, ring, &self.z);
        out
    }

    pub fn decode(pp: &PublicParams, bytes: &[u8]) -> Result<Self, ProofError> {
        let (ring, p) = pp_ring(pp);
        let go = || {
            let mut r = Reader::new(bytes);
            read_header(&mut r, KIND)?;
            let one = |r: &mut Reader| r.polys(ring, Some(1)).map(|mut v| v.pop().unwrap());
            let pf = PoaProof {
                f1: one(&mut r)?,
                u1: one(&mut r)?,
                u2: one(&mut r)?,
                u3: one(&mut r)?,
                w: r.polys(ring, Some(p.kappa))?,
                h: one(&mut r)?,
                u4: one(&mut r)?,
                z: r.short_polys(ring, Some(p.n_rand()))?,
            };
            r.finish()?;
            Ok(pf)
        };
        go().map_err(enc_err(KIND))
    }
}

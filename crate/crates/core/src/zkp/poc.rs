//! Consistency: a transaction commitment is `[A; pk1; pk2; B] r + (0, v, sqrt(q) v, v)`
//! with `||r||_inf` small, and (outside compact mode) `v` is a constant.
//!
//! `r` sits in the Ajtai part and `v` in the BDLOP part of an auxiliary ABDLOP
//! commitment `f = (A1 r + A2 s, B1 s + v)`. An approximate range proof on
//! `z3 = y3 + R r` bounds `r`, and a garbage term `h` with vanishing constant
//! coefficient ties `z3` and the top coefficients of `v` to the witness.

use rand::RngCore;

use super::common::*;
use crate::commit::{Commitment, PublicKey, PublicParams};
use crate::ring::{vec::vec_add, vec::vec_sub, vec::vec_dot, Poly, Ring};
use crate::sampling::{chi_polys, ProjMatrix};
use crate::transcript::Transcript;
use crate::wire::{self, Reader};

const KIND: ProofKind = ProofKind::PoC;

pub const CHECK_Z1: &str = "(a) ||z1|| bound";
pub const CHECK_Z2: &str = "(b) ||z2|| bound";
pub const CHECK_Z3: &str = "(c) ||z3||_inf bound";
pub const CHECK_H: &str = "(d) constant coefficient of h is 0";
pub const CHECK_OPEN: &str = "(e) A1 z1 + A2 z2 = w + c f0";
pub const CHECK_LINEAR: &str = "(f) linear system T";

pub struct PocStatement<'a> {
    pub pk: &'a PublicKey,
    pub com: &'a Commitment,
    /// Compact commitments carry one value per coefficient, so `v` is not
    /// required to be constant.
    pub compact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PocProof {
    pub f0: Vec<Poly>,
    pub f1: Poly,
    pub u1: Vec<Poly>,
    pub u2: Poly,
    pub z3: Vec<i128>,
    pub h: Poly,
    pub w: Vec<Poly>,
    pub v: Vec<Poly>,
    pub z1: Vec<Poly>,
    pub z2: Vec<Poly>,
}

/// Number of top coefficients of `v` forced to zero.
fn d2_len(ring: &Ring, compact: bool) -> usize {
    if compact {
        0
    } else {
        ring.d.min(128) - 1
    }
}

struct Challenges {
    r: ProjMatrix,
    d1: Vec<u128>,
    d2: Vec<u128>,
}

/// Public functionals derived from the challenges.
struct Functionals {
    rho: Vec<Poly>,
    pd1: Vec<Poly>,
    sd2: Poly,
}

impl Functionals {
    fn new(ring: &Ring, ch: &Challenges) -> Self {
        let mut d2 = vec![0u128; ring.d];
        for (k, &x) in ch.d2.iter().enumerate() {
            d2[k + 1] = x;
        }
        Functionals {
            rho: proj_functional(ring, &ch.r, &ch.d1),
            pd1: sigma_pack(ring, &ch.d1),
            sd2: ring.sigma_m1(&Poly(d2)),
        }
    }
}

fn start(pp: &PublicParams, ctx: &[u8], st: &PocStatement) -> Transcript {
    let ring = &pp.ring;
    let mut t = transcript(KIND, ctx);
    absorb_pk(&mut t, ring, st.pk);
    absorb_com(&mut t, "com", ring, st.com);
    t.absorb_u64("compact", st.compact as u64);
    t
}

fn absorb_first(t: &mut Transcript, ring: &Ring, f0: &[Poly], f1: &Poly, u1: &[Poly], u2: &Poly) {
    t.absorb_polys("f0", ring, f0);
    t.absorb_polys("f1", ring, std::slice::from_ref(f1));
    t.absorb_polys("u1", ring, u1);
    t.absorb_polys("u2", ring, std::slice::from_ref(u2));
}

fn proj(t: &mut Transcript, p: &crate::params::ParamSet) -> ProjMatrix {
    proj_challenge(t, "R", p.big_n())
}

fn absorb_z3(t: &mut Transcript, ring: &Ring, z3: &[i128], compact: bool) -> (Vec<u128>, Vec<u128>) {
    t.absorb_ints("z3", z3);
    let d1 = scalars(t, "d1", ring.q(), 256);
    let d2 = scalars(t, "d2", ring.q(), d2_len(ring, compact));
    (d1, d2)
}

fn absorb_third(t: &mut Transcript, ring: &Ring, h: &Poly, w: &[Poly], v: &[Poly]) {
    t.absorb_polys("h", ring, std::slice::from_ref(h));
    t.absorb_polys("w", ring, w);
    t.absorb_polys("v", ring, v);
}

/// `T [a; b1; bp; bpp]` with column blocks `[n | 1 | 256/d | 1]`.
fn t_apply(
    pp: &PublicParams,
    st: &PocStatement,
    fun: &Functionals,
    a: &[Poly],
    b1: &Poly,
    bp: &[Poly],
    bpp: &Poly,
) -> Vec<Poly> {
    let ring = &pp.ring;
    let (p1, p2) = st.pk.rows(ring);
    let an = crate::ring::NttVec::from_polys(ring, a);
    let mut out = pp.a.mul_ntt(ring, &an);
    out.push(ring.add(&p1.dot(ring, &an), b1));
    out.push(ring.add(&p2.dot(ring, &an), &ring.scale(b1, pp.sqrt_q_residue())));
    out.push(ring.add(&pp.b.mul_ntt(ring, &an)[0], b1));
    let last = ring.add(
        &ring.add(&vec_dot(ring, &fun.rho, a), &ring.mul(&fun.sd2, b1)),
        &ring.add(&vec_dot(ring, &fun.pd1, bp), bpp),
    );
    out.push(last);
    out
}

pub fn prove_poc<R: RngCore + ?Sized>(
    pp: &PublicParams,
    ctx: &[u8],
    st: &PocStatement,
    r: &[Poly],
    value: &Poly,
    rng: &mut R,
    opts: &ProveOptions,
) -> Result<PocProof, ProofError> {
    let (ring, p) = pp_ring(pp);
    let n = p.n_rand();
    if r.len() != n {
        return Err(shape(KIND, "randomness length"));
    }
    let [s1, s2, s3] = [p.sigma_sq.poc.sq[0], p.sigma_sq.poc.sq[1], p.sigma_sq.poc.sq[2]];
    let r_ints = ints(ring, r);
    with_restarts(KIND, opts, || {
        let mut t = start(pp, ctx, st);
        // first move
        let s = chi_polys(ring, rng, n);
        let f0 = vec_add(ring, &pp.a1.mul_vec(ring, r), &pp.a2.mul_vec(ring, &s));
        let f1 = ring.add(&pp.b1.mul_vec(ring, &s)[0], value);
        let y3 = mask_ints(rng, s3, 256);
        let u1 = vec_add(ring, &pp.bc1.mul_vec(ring, &s), &pack_i(ring, &y3));
        let g = garbage_mask(ring, rng, 1, opts.fault);
        let u2 = ring.add(&pp.bc2.mul_vec(ring, &s)[0], &g);
        absorb_first(&mut t, ring, &f0, &f1, &u1, &u2);
        // projection
        let rm = proj(&mut t, p);
        let rr = rm.mul(&r_ints);
        let z3: Vec<i128> = y3.iter().zip(&rr).map(|(a, b)| a + b).collect();
        if !rej_ints(rng, opts, &z3, &rr, s3, p.rej_m) {
            return Ok(None);
        }
        let (d1, d2) = absorb_z3(&mut t, ring, &z3, st.compact);
        let fun = Functionals::new(ring, &Challenges { r: rm, d1, d2 });
        // garbage and masked openings
        let y3z3: Vec<i128> = y3.iter().zip(&z3).map(|(a, b)| a - b).collect();
        let x = ring.add(
            &ring.add(&vec_dot(ring, &fun.rho, r), &vec_dot(ring, &fun.pd1, &pack_i(ring, &y3z3))),
            &ring.mul(&fun.sd2, value),
        );
        let mut h = ring.add(&g, &x);
        apply_h_fault(&mut h, 1, opts.fault);
        let y1 = mask(ring, rng, s1, n);
        let y2 = mask(ring, rng, s2, n);
        let w = vec_add(ring, &pp.a1.mul_vec(ring, &y1), &pp.a2.mul_vec(ring, &y2));
        let b1y = ring.neg(&pp.b1.mul_vec(ring, &y2)[0]);
        let bpy: Vec<Poly> = pp.bc1.mul_vec(ring, &y2).iter().map(|x| ring.neg(x)).collect();
        let bppy = ring.neg(&pp.bc2.mul_vec(ring, &y2)[0]);
        let v = t_apply(pp, st, &fun, &y1, &b1y, &bpy, &bppy);
        absorb_third(&mut t, ring, &h, &w, &v);
        let c = challenge(&mut t, ring, p);
        let cr = cmul(ring, &c, r);
        let cs = cmul(ring, &c, &s);
        let z1 = vec_add(ring, &y1, &cr);
        let z2 = vec_add(ring, &y2, &cs);
        if !rej_polys(ring, rng, opts, &z1, &cr, s1, p.rej_m)
            || !rej_polys(ring, rng, opts, &z2, &cs, s2, p.rej_m)
        {
            return Ok(None);
        }
        Ok(Some(PocProof { f0, f1, u1, u2, z3, h, w, v, z1, z2 }))
    })
}

pub fn verify_poc(
    pp: &PublicParams,
    ctx: &[u8],
    st: &PocStatement,
    pf: &PocProof,
) -> Result<(), ProofError> {
    let (ring, p) = pp_ring(pp);
    let n = p.n_rand();
    let [s1, s2, s3] = [p.sigma_sq.poc.sq[0], p.sigma_sq.poc.sq[1], p.sigma_sq.poc.sq[2]];
    if pf.z1.len() != n || pf.z2.len() != n || pf.z3.len() != 256 || pf.v.len() != p.kappa + 4 {
        return Err(shape(KIND, "proof dimensions"));
    }
    let mut t = start(pp, ctx, st);
    absorb_first(&mut t, ring, &pf.f0, &pf.f1, &pf.u1, &pf.u2);
    let rm = proj(&mut t, p);
    let (d1, d2) = absorb_z3(&mut t, ring, &pf.z3, st.compact);
    let fun = Functionals::new(ring, &Challenges { r: rm, d1, d2 });
    absorb_third(&mut t, ring, &pf.h, &pf.w, &pf.v);
    let c = challenge(&mut t, ring, p);

    if !l2_ok(ring, &pf.z1, s1) {
        return Err(fail(KIND, CHECK_Z1));
    }
    if !l2_ok(ring, &pf.z2, s2) {
        return Err(fail(KIND, CHECK_Z2));
    }
    if !inf_ok(&pf.z3, s3) {
        return Err(fail(KIND, CHECK_Z3));
    }
    if pf.h.0[0] != 0 {
        return Err(fail(KIND, CHECK_H));
    }
    let lhs = vec_add(ring, &pp.a1.mul_vec(ring, &pf.z1), &pp.a2.mul_vec(ring, &pf.z2));
    if lhs != vec_add(ring, &pf.w, &cmul(ring, &c, &pf.f0)) {
        return Err(fail(KIND, CHECK_OPEN));
    }
    let cm = |x: &Poly| ring.mul(&c, x);
    let b1 = ring.sub(&cm(&pf.f1), &pp.b1.mul_vec(ring, &pf.z2)[0]);
    let bp = vec_sub(ring, &cmul(ring, &c, &pf.u1), &pp.bc1.mul_vec(ring, &pf.z2));
    let bpp = ring.sub(&cm(&pf.u2), &pp.bc2.mul_vec(ring, &pf.z2)[0]);
    let tz = t_apply(pp, st, &fun, &pf.z1, &b1, &bp, &bpp);
    let mut rhs = st.com.c0.clone();
    rhs.extend([st.com.c1.clone(), st.com.c2.clone(), st.com.c3.clone()]);
    rhs.push(ring.add(&pf.h, &vec_dot(ring, &fun.pd1, &pack_i(ring, &pf.z3))));
    let expect = vec_sub(ring, &tz, &cmul(ring, &c, &rhs));
    if expect != pf.v {
        return Err(fail(KIND, CHECK_LINEAR));
    }
    Ok(())
}

impl PocProof {
    pub fn encode(&self, pp: &PublicParams) -> Vec<u8> {
        let ring = &pp.ring;
        let mut out = header(KIND);
        wire::put_polys(&mut out, ring, &self.f0);
        wire::put_polys(&mut out, ring, std::slice::from_ref(&self.f1));
        wire::put_polys(&mut out, ring, &self.u1);
        wire::put_polys(&mut out, ring, std::slice::from_ref(&self.u2));
        put_int_section(&mut out, &self.z3);
        wire::put_polys(&mut out, ring, std::slice::from_ref(&self.h));
        wire::put_polys(&mut out, ring, &self.w);
        wire::put_polys(&mut out, ring, &self.v);
        wire::put_short_polys(&mut out, ring, &self.z1);
        wire::put_short_polys(&mut out, ring, &self.z2);
        out
    }

    pub fn decode(pp: &PublicParams, bytes: &[u8]) -> Result<Self, ProofError> {
        let (ring, p) = pp_ring(pp);
        let (k, n, pr) = (p.kappa, p.n_rand(), p.proj_polys());
        let go = || {
            let mut r = Reader::new(bytes);
            read_header(&mut r, KIND)?;
            let one = |r: &mut Reader| r.polys(ring, Some(1)).map(|mut v| v.pop().unwrap());
            let pf = PocProof {
                f0: r.polys(ring, Some(k))?,
                f1: one(&mut r)?,
                u1: r.polys(ring, Some(pr))?,
                u2: one(&mut r)?,
                z3: read_int_section(&mut r, 256)?,
                h: one(&mut r)?,
                w: r.polys(ring, Some(k))?,
                v: r.polys(ring, Some(k + 4))?,
                z1: r.short_polys(ring, Some(n))?,
                z2: r.short_polys(ring, Some(n))?,
            };
            r.finish()?;
            Ok(pf)
        };
        go().map_err(enc_err(KIND))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zkp::fixture::*;
    use crate::zkp::Fault;

    #[test]
    fn honest_commitment_verifies_and_roundtrips() {
        let f = fx();
        let mut g = rng(31);
        let v = f.pp.ring.constant(17);
        let (com, r) = commit_poly(f, &v, &mut g);
        let st = PocStatement { pk: &f.pk, com: &com, compact: false };
        let pf = prove_poc(&f.pp, b"c", &st, &r, &v, &mut g, &ProveOptions::default()).unwrap();
        verify_poc(&f.pp, b"c", &st, &pf).unwrap();
        assert_eq!(PocProof::decode(&f.pp, &pf.encode(&f.pp)).unwrap(), pf);
    }

    #[test]
    fn non_constant_value_fails_garbage_check() {
        let f = fx();
        let ring = &f.pp.ring;
        let mut g = rng(32);
        let v = ring.add(&ring.constant(5), &ring.monomial(3));
        let (com, r) = commit_poly(f, &v, &mut g);
        let st = PocStatement { pk: &f.pk, com: &com, compact: false };
        let pf = prove_poc(&f.pp, b"c", &st, &r, &v, &mut g, &ProveOptions::default()).unwrap();
        assert_eq!(verify_poc(&f.pp, b"c", &st, &pf).unwrap_err().check(), Some(CHECK_H));
        let st = PocStatement { compact: true, ..st };
        let pf = prove_poc(&f.pp, b"c", &st, &r, &v, &mut g, &ProveOptions::default()).unwrap();
        verify_poc(&f.pp, b"c", &st, &pf).unwrap();
    }

    #[test]
    fn faults_hit_named_checks() {
        let f = fx();
        let mut g = rng(33);
        let v = f.pp.ring.constant(2);
        let (com, r) = commit_poly(f, &v, &mut g);
        let st = PocStatement { pk: &f.pk, com: &com, compact: false };
        let pf = prove_poc(&f.pp, b"c", &st, &r, &v, &mut g, &ProveOptions::with_fault(Fault::GConstant)).unwrap();
        assert_eq!(verify_poc(&f.pp, b"c", &st, &pf).unwrap_err().check(), Some(CHECK_H));
    }

    #[test]
    fn forced_h_with_non_constant_value_fails_linear_check() {
        let f = fx();
        let ring = &f.pp.ring;
        let mut g = rng(35);
        let v = ring.add(&ring.constant(5), &ring.monomial(3));
        let (com, r) = commit_poly(f, &v, &mut g);
        let st = PocStatement { pk: &f.pk, com: &com, compact: false };
        let opts = ProveOptions::with_fault(Fault::ZeroHConstant);
        let pf = prove_poc(&f.pp, b"c", &st, &r, &v, &mut g, &opts).unwrap();
        assert_eq!(verify_poc(&f.pp, b"c", &st, &pf).unwrap_err().check(), Some(CHECK_LINEAR));
    }

    #[test]
    fn inconsistent_sqrt_q_row_fails_linear_check() {
        let f = fx();
        let ring = &f.pp.ring;
        let mut g = rng(36);
        let v = ring.constant(8);
        let (mut com, r) = commit_poly(f, &v, &mut g);
        com.c2 = ring.add(&com.c2, &ring.one());
        let st = PocStatement { pk: &f.pk, com: &com, compact: false };
        let pf = prove_poc(&f.pp, b"c", &st, &r, &v, &mut g, &ProveOptions::default()).unwrap();
        assert_eq!(verify_poc(&f.pp, b"c", &st, &pf).unwrap_err().check(), Some(CHECK_LINEAR));
    }

    #[test]
    fn wrong_opening_fails_linear_check() {
        let f = fx();
        let ring = &f.pp.ring;
        let mut g = rng(34);
        let v = ring.constant(2);
        let (com, r) = commit_poly(f, &v, &mut g);
        let st = PocStatement { pk: &f.pk, com: &com, compact: false };
        let pf = prove_poc(&f.pp, b"c", &st, &r, &ring.constant(3), &mut g, &ProveOptions::default()).unwrap();
        assert_eq!(verify_poc(&f.pp, b"c", &st, &pf).unwrap_err().check(), Some(CHECK_LINEAR));
    }
}

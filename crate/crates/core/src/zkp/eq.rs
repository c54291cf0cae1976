//! Equivalence (PoE) and key well-formedness (PoKW).
//!
//! Both prove knowledge of a short `m = s1 || e1 || s2 || e2` with
//! `[A^T s1 + e1; A^T s2 + e2] = [pk1; pk2]`, committed in the Ajtai part of
//! `f = A3 m + A4 s`. PoE additionally bounds the decryption of
//! `com - com'`:
//!
//! ```text
//! l = [cd0^T s1 - cd1; cd0^T s2 - cd2],   cd = com - com'
//! ```
//!
//! which is short only when both commitments hold the same value, because the
//! second row scales any difference by `sqrt(q)`. PoKW projects `m` itself.

use rand::RngCore;

use super::common::*;
use crate::commit::{Commitment, PublicKey, PublicParams, SecretKey};
use crate::params::ParamSet;
use crate::ring::{vec::vec_add, vec::vec_dot, vec::vec_sub, Poly, Ring};
use crate::sampling::{chi_polys, uniform_polys, ProjMatrix};
use crate::transcript::Transcript;
use crate::wire::{self, Reader, WireError};

pub const CHECK_Z1: &str = "(a) ||z1|| bound";
pub const CHECK_Z2: &str = "(b) ||z2|| bound";
pub const CHECK_Z3: &str = "(c) ||z3||_inf bound";
pub const CHECK_H: &str = "(d) constant coefficient of h is 0";
pub const CHECK_OPEN: &str = "(e) A3 z1 + A4 z2 = w + c f";
pub const CHECK_LINEAR: &str = "(f) linear system T";

/// PoE statement: the column sum (including pending spends) and its recommitment.
pub struct PoeStatement<'a> {
    pub pk: &'a PublicKey,
    pub com: &'a Commitment,
    pub com2: &'a Commitment,
}

pub struct PokwStatement<'a> {
    pub pk: &'a PublicKey,
}

/// Shared statement form.
pub(crate) struct Core<'a> {
    kind: ProofKind,
    pk: &'a PublicKey,
    cd: Option<Commitment>,
    com: Option<(&'a Commitment, &'a Commitment)>,
}

impl<'a> Core<'a> {
    pub(crate) fn poe(pp: &PublicParams, st: &PoeStatement<'a>) -> Self {
        Core {
            kind: ProofKind::PoE,
            pk: st.pk,
            cd: Some(st.com.sub(&pp.ring, st.com2)),
            com: Some((st.com, st.com2)),
        }
    }

    fn pokw(st: &PokwStatement<'a>) -> Self {
        Core { kind: ProofKind::PoKW, pk: st.pk, cd: None, com: None }
    }

    fn sigmas(&self, p: &ParamSet) -> [u128; 3] {
        let s = match self.kind {
            ProofKind::PoE => &p.sigma_sq.poe.sq,
            _ => &p.sigma_sq.pokw.sq,
        };
        [s[0], s[1], s[2]]
    }

    fn proj_cols(&self, p: &ParamSet) -> usize {
        match self.cd {
            Some(_) => 2 * p.d,
            None => p.m_len() * p.d,
        }
    }

    pub(crate) fn absorb(&self, t: &mut Transcript, ring: &Ring) {
        absorb_pk(t, ring, self.pk);
        if let Some((a, b)) = self.com {
            absorb_com(t, "com", ring, a);
            absorb_com(t, "com'", ring, b);
        }
    }

    /// Prover's projected vector.
    fn l(&self, ring: &Ring, p: &ParamSet, m: &[Poly]) -> Vec<i128> {
        match &self.cd {
            Some(cd) => {
                let (k, n) = (p.kappa, p.n_rand());
                let s1 = &m[..k];
                let s2 = &m[k + n..2 * k + n];
                let l1 = ring.sub(&vec_dot(ring, &cd.c0, s1), &cd.c1);
                let l2 = ring.sub(&vec_dot(ring, &cd.c0, s2), &cd.c2);
                ints(ring, &[l1, l2])
            }
            None => ints(ring, m),
        }
    }

    /// `(L, offset)` with `L^T m - offset = rho^T (C m - u)` as polynomials.
    fn linear(&self, ring: &Ring, p: &ParamSet, rho: &[Poly]) -> (Vec<Poly>, Poly) {
        match &self.cd {
            Some(cd) => {
                let (k, n) = (p.kappa, p.n_rand());
                let mut lin = vec![ring.zero(); p.m_len()];
                for j in 0..k {
                    lin[j] = ring.mul(&rho[0], &cd.c0[j]);
                    lin[k + n + j] = ring.mul(&rho[1], &cd.c0[j]);
                }
                let off = ring.add(&ring.mul(&rho[0], &cd.c1), &ring.mul(&rho[1], &cd.c2));
                (lin, off)
            }
            None => (rho.to_vec(), ring.zero()),
        }
    }
}

/// Everything before the final challenge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqFirst {
    pub f: Vec<Poly>,
    pub u1: Vec<Poly>,
    pub u2: Poly,
    pub z3: Vec<i128>,
    pub h: Poly,
    pub w: Vec<Poly>,
    pub v: Vec<Poly>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqProof {
    pub kind: ProofKind,
    pub first: EqFirst,
    pub z1: Vec<Poly>,
    pub z2: Vec<Poly>,
}

pub(crate) struct EqMasks {
    s: Vec<Poly>,
    y1: Vec<Poly>,
    y2: Vec<Poly>,
}

pub(crate) struct Fun {
    lin: Vec<Poly>,
    off: Poly,
    pd1: Vec<Poly>,
}

fn derive_r(t: &mut Transcript, ring: &Ring, core: &Core, p: &ParamSet, f: &[Poly], u1: &[Poly], u2: &Poly) -> ProjMatrix {
    t.absorb_polys("f", ring, f);
    t.absorb_polys("u1", ring, u1);
    t.absorb_polys("u2", ring, std::slice::from_ref(u2));
    proj_challenge(t, "R", core.proj_cols(p))
}

fn derive_fun(t: &mut Transcript, ring: &Ring, core: &Core, p: &ParamSet, rm: &ProjMatrix, z3: &[i128]) -> Fun {
    t.absorb_ints("z3", z3);
    let d1 = scalars(t, "d1", ring.q(), 256);
    let rho = proj_functional(ring, rm, &d1);
    let (lin, off) = core.linear(ring, p, &rho);
    Fun { lin, off, pd1: sigma_pack(ring, &d1) }
}

fn absorb_third(t: &mut Transcript, ring: &Ring, f: &EqFirst) {
    t.absorb_polys("h", ring, std::slice::from_ref(&f.h));
    t.absorb_polys("w", ring, &f.w);
    t.absorb_polys("v", ring, &f.v);
}

/// `[A^T a_s1 + a_e1; A^T a_s2 + a_e2]`.
fn a_tilde(pp: &PublicParams, a: &[Poly]) -> Vec<Poly> {
    let ring = &pp.ring;
    let (k, n) = (pp.params.kappa, pp.params.n_rand());
    let mut out = vec_add(ring, &pp.a.tmul_vec(ring, &a[..k]), &a[k..k + n]);
    out.extend(vec_add(ring, &pp.a.tmul_vec(ring, &a[k + n..2 * k + n]), &a[2 * k + n..]));
    out
}

/// `T [a; bp; bpp]` with column blocks `[m_len | 256/d | 1]`.
fn t_apply(pp: &PublicParams, fun: &Fun, a: &[Poly], bp: &[Poly], bpp: &Poly) -> Vec<Poly> {
    let ring = &pp.ring;
    let mut out = a_tilde(pp, a);
    let last = ring.add(&ring.add(&vec_dot(ring, &fun.lin, a), &vec_dot(ring, &fun.pd1, bp)), bpp);
    out.push(last);
    out
}

/// The verifier's reconstruction of `v`.
fn expected_v(
    pp: &PublicParams,
    core: &Core,
    fun: &Fun,
    f: &EqFirst,
    c: &Poly,
    z1: &[Poly],
    z2: &[Poly],
) -> Vec<Poly> {
    let ring = &pp.ring;
    let bp = vec_sub(ring, &cmul(ring, c, &f.u1), &pp.beq1.mul_vec(ring, z2));
    let bpp = ring.sub(&ring.mul(c, &f.u2), &pp.beq2.mul_vec(ring, z2)[0]);
    let tz = t_apply(pp, fun, z1, &bp, &bpp);
    let mut rhs = core.pk.pk1.clone();
    rhs.extend(core.pk.pk2.iter().cloned());
    let tail = ring.add(&ring.add(&f.h, &vec_dot(ring, &fun.pd1, &pack_i(ring, &f.z3))), &fun.off);
    rhs.push(tail);
    vec_sub(ring, &tz, &cmul(ring, c, &rhs))
}

/// Runs every move up to the final challenge; `None` when the projection
/// response is rejected.
pub(crate) fn first<R: RngCore + ?Sized>(
    pp: &PublicParams,
    core: &Core,
    t: &mut Transcript,
    m: &[Poly],
    rng: &mut R,
    opts: &ProveOptions,
) -> Option<(EqFirst, EqMasks)> {
    let (ring, p) = pp_ring(pp);
    let [s1, s2, s3] = core.sigmas(p);
    let n = p.n_rand();
    let s = chi_polys(ring, rng, n);
    let f = vec_add(ring, &pp.a3.mul_vec(ring, m), &pp.a4.mul_vec(ring, &s));
    let y3 = mask_ints(rng, s3, 256);
    let u1 = vec_add(ring, &pp.beq1.mul_vec(ring, &s), &pack_i(ring, &y3));
    let g = garbage_mask(ring, rng, 1, opts.fault);
    let u2 = ring.add(&pp.beq2.mul_vec(ring, &s)[0], &g);
    let rm = derive_r(t, ring, core, p, &f, &u1, &u2);
    let rl = rm.mul(&core.l(ring, p, m));
    let z3: Vec<i128> = y3.iter().zip(&rl).map(|(a, b)| a + b).collect();
    if !rej_ints(rng, opts, &z3, &rl, s3, p.rej_m) {
        return None;
    }
    let fun = derive_fun(t, ring, core, p, &rm, &z3);
    let y3z3: Vec<i128> = y3.iter().zip(&z3).map(|(a, b)| a - b).collect();
    let x = ring.sub(
        &ring.add(&vec_dot(ring, &fun.lin, m), &vec_dot(ring, &fun.pd1, &pack_i(ring, &y3z3))),
        &fun.off,
    );
    let mut h = ring.add(&g, &x);
    apply_h_fault(&mut h, 1, opts.fault);
    let y1 = mask(ring, rng, s1, p.m_len());
    let y2 = mask(ring, rng, s2, n);
    let w = vec_add(ring, &pp.a3.mul_vec(ring, &y1), &pp.a4.mul_vec(ring, &y2));
    let bp: Vec<Poly> = pp.beq1.mul_vec(ring, &y2).iter().map(|x| ring.neg(x)).collect();
    let bpp = ring.neg(&pp.beq2.mul_vec(ring, &y2)[0]);
    let v = t_apply(pp, &fun, &y1, &bp, &bpp);
    let first = EqFirst { f, u1, u2, z3, h, w, v };
    absorb_third(t, ring, &first);
    Some((first, EqMasks { s, y1, y2 }))
}

pub(crate) fn respond<R: RngCore + ?Sized>(
    pp: &PublicParams,
    core: &Core,
    masks: &EqMasks,
    m: &[Poly],
    c: &Poly,
    rng: &mut R,
    opts: &ProveOptions,
) -> Option<(Vec<Poly>, Vec<Poly>)> {
    let (ring, p) = pp_ring(pp);
    let [s1, s2, _] = core.sigmas(p);
    let cm = cmul(ring, c, m);
    let cs = cmul(ring, c, &masks.s);
    let z1 = vec_add(ring, &masks.y1, &cm);
    let z2 = vec_add(ring, &masks.y2, &cs);
    let ok = rej_polys(ring, rng, opts, &z1, &cm, s1, p.rej_m)
        && rej_polys(ring, rng, opts, &z2, &cs, s2, p.rej_m);
    ok.then_some((z1, z2))
}

/// Simulated accepting transcript for challenge `c`.
pub(crate) fn simulate<R: RngCore + ?Sized>(
    pp: &PublicParams,
    core: &Core,
    t: &mut Transcript,
    c: &Poly,
    rng: &mut R,
) -> (EqFirst, Vec<Poly>, Vec<Poly>) {
    let (ring, p) = pp_ring(pp);
    let [s1, s2, s3] = core.sigmas(p);
    let f = uniform_polys(ring, rng, p.kappa);
    let u1 = uniform_polys(ring, rng, p.proj_polys());
    let u2 = crate::sampling::uniform_poly(ring, rng);
    let rm = derive_r(t, ring, core, p, &f, &u1, &u2);
    let z3 = mask_ints(rng, s3, 256);
    let fun = derive_fun(t, ring, core, p, &rm, &z3);
    let h = garbage_mask(ring, rng, 1, None);
    let z1 = mask(ring, rng, s1, p.m_len());
    let z2 = mask(ring, rng, s2, p.n_rand());
    let w = vec_sub(
        ring,
        &vec_add(ring, &pp.a3.mul_vec(ring, &z1), &pp.a4.mul_vec(ring, &z2)),
        &cmul(ring, c, &f),
    );
    let mut first = EqFirst { f, u1, u2, z3, h, w, v: vec![] };
    first.v = expected_v(pp, core, &fun, &first, c, &z1, &z2);
    absorb_third(t, ring, &first);
    (first, z1, z2)
}

/// Recomputes the inner challenges from `t`, absorbing the whole first phase.
pub(crate) fn derive(pp: &PublicParams, core: &Core, t: &mut Transcript, f: &EqFirst) -> Fun {
    let (ring, p) = pp_ring(pp);
    let rm = derive_r(t, ring, core, p, &f.f, &f.u1, &f.u2);
    let fun = derive_fun(t, ring, core, p, &rm, &f.z3);
    absorb_third(t, ring, f);
    fun
}

/// Checks (a) to (f).
pub(crate) fn check(
    pp: &PublicParams,
    core: &Core,
    fun: &Fun,
    f: &EqFirst,
    c: &Poly,
    z1: &[Poly],
    z2: &[Poly],
) -> Result<(), ProofError> {
    let (ring, p) = pp_ring(pp);
    let kind = core.kind;
    let [s1, s2, s3] = core.sigmas(p);
    check_dims(p, kind, f, z1, z2)?;
    if !l2_ok(ring, z1, s1) {
        return Err(fail(kind, CHECK_Z1));
    }
    if !l2_ok(ring, z2, s2) {
        return Err(fail(kind, CHECK_Z2));
    }
    if !inf_ok(&f.z3, s3) {
        return Err(fail(kind, CHECK_Z3));
    }
    if f.h.0[0] != 0 {
        return Err(fail(kind, CHECK_H));
    }
    let lhs = vec_add(ring, &pp.a3.mul_vec(ring, z1), &pp.a4.mul_vec(ring, z2));
    if lhs != vec_add(ring, &f.w, &cmul(ring, c, &f.f)) {
        return Err(fail(kind, CHECK_OPEN));
    }
    if expected_v(pp, core, fun, f, c, z1, z2) != f.v {
        return Err(fail(kind, CHECK_LINEAR));
    }
    Ok(())
}

fn start(pp: &PublicParams, core: &Core, ctx: &[u8]) -> Transcript {
    let mut t = transcript(core.kind, ctx);
    core.absorb(&mut t, &pp.ring);
    t
}

fn prove<R: RngCore + ?Sized>(
    pp: &PublicParams,
    ctx: &[u8],
    core: &Core,
    sk: &SecretKey,
    rng: &mut R,
    opts: &ProveOptions,
) -> Result<EqProof, ProofError> {
    let (ring, p) = pp_ring(pp);
    let m = sk.witness();
    if m.len() != p.m_len() {
        return Err(shape(core.kind, "secret key length"));
    }
    with_restarts(core.kind, opts, || {
        let mut t = start(pp, core, ctx);
        let Some((first, masks)) = first(pp, core, &mut t, &m, rng, opts) else {
            return Ok(None);
        };
        let c = challenge(&mut t, ring, p);
        Ok(respond(pp, core, &masks, &m, &c, rng, opts)
            .map(|(z1, z2)| EqProof { kind: core.kind, first, z1, z2 }))
    })
}

fn verify(pp: &PublicParams, ctx: &[u8], core: &Core, pf: &EqProof) -> Result<(), ProofError> {
    let (ring, p) = pp_ring(pp);
    if pf.kind != core.kind {
        return Err(shape(core.kind, "proof kind"));
    }
    check_dims(p, core.kind, &pf.first, &pf.z1, &pf.z2)?;
    let mut t = start(pp, core, ctx);
    let fun = derive(pp, core, &mut t, &pf.first);
    let c = challenge(&mut t, ring, p);
    check(pp, core, &fun, &pf.first, &c, &pf.z1, &pf.z2)
}

pub(crate) fn check_dims(
    p: &ParamSet,
    kind: ProofKind,
    f: &EqFirst,
    z1: &[Poly],
    z2: &[Poly],
) -> Result<(), ProofError> {
    let n = p.n_rand();
    if z1.len() != p.m_len() || z2.len() != n || f.z3.len() != 256 || f.v.len() != 2 * n + 1 {
        return Err(shape(kind, "proof dimensions"));
    }
    Ok(())
}

pub fn prove_poe<R: RngCore + ?Sized>(
    pp: &PublicParams,
    ctx: &[u8],
    st: &PoeStatement,
    sk: &SecretKey,
    rng: &mut R,
    opts: &ProveOptions,
) -> Result<EqProof, ProofError> {
    prove(pp, ctx, &Core::poe(pp, st), sk, rng, opts)
}

pub fn verify_poe(pp: &PublicParams, ctx: &[u8], st: &PoeStatement, pf: &EqProof) -> Result<(), ProofError> {
    verify(pp, ctx, &Core::poe(pp, st), pf)
}

pub fn prove_pokw<R: RngCore + ?Sized>(
    pp: &PublicParams,
    ctx: &[u8],
    st: &PokwStatement,
    sk: &SecretKey,
    rng: &mut R,
    opts: &ProveOptions,
) -> Result<EqProof, ProofError> {
    prove(pp, ctx, &Core::pokw(st), sk, rng, opts)
}

pub fn verify_pokw(pp: &PublicParams, ctx: &[u8], st: &PokwStatement, pf: &EqProof) -> Result<(), ProofError> {
    verify(pp, ctx, &Core::pokw(st), pf)
}

impl EqFirst {
    pub(crate) fn absorb_all(&self, t: &mut Transcript, ring: &Ring) {
        t.absorb_polys("f", ring, &self.f);
        t.absorb_polys("u1", ring, &self.u1);
        t.absorb_polys("u2", ring, std::slice::from_ref(&self.u2));
        t.absorb_ints("z3", &self.z3);
        absorb_third(t, ring, self);
    }

    pub(crate) fn write(&self, out: &mut Vec<u8>, ring: &Ring) {
        wire::put_polys(out, ring, &self.f);
        wire::put_polys(out, ring, &self.u1);
        wire::put_polys(out, ring, std::slice::from_ref(&self.u2));
        put_int_section(out, &self.z3);
        wire::put_polys(out, ring, std::slice::from_ref(&self.h));
        wire::put_polys(out, ring, &self.w);
        wire::put_polys(out, ring, &self.v);
    }

    pub(crate) fn read(r: &mut Reader, pp: &PublicParams) -> Result<Self, WireError> {
        let (ring, p) = pp_ring(pp);
        let one = |r: &mut Reader| r.polys(ring, Some(1)).map(|mut v| v.pop().unwrap());
        Ok(EqFirst {
            f: r.polys(ring, Some(p.kappa))?,
            u1: r.polys(ring, Some(p.proj_polys()))?,
            u2: one(r)?,
            z3: read_int_section(r, 256)?,
            h: one(r)?,
            w: r.polys(ring, Some(p.kappa))?,
            v: r.polys(ring, Some(2 * p.n_rand() + 1))?,
        })
    }
}

/// Encodes the responses of an equivalence proof.
pub(crate) fn write_responses(out: &mut Vec<u8>, ring: &Ring, z1: &[Poly], z2: &[Poly]) {
    wire::put_short_polys(out, ring, z1);
    wire::put_short_polys(out, ring, z2);
}

pub(crate) fn read_responses(r: &mut Reader, pp: &PublicParams) -> Result<(Vec<Poly>, Vec<Poly>), WireError> {
    let (ring, p) = pp_ring(pp);
    Ok((r.short_polys(ring, Some(p.m_len()))?, r.short_polys(ring, Some(p.n_rand()))?))
}

impl EqProof {
    pub fn encode(&self, pp: &PublicParams) -> Vec<u8> {
        let mut out = header(self.kind);
        self.first.write(&mut out, &pp.ring);
        write_responses(&mut out, &pp.ring, &self.z1, &self.z2);
        out
    }

    /// `kind` is `PoE` or `PoKW`.
    pub fn decode(pp: &PublicParams, kind: ProofKind, bytes: &[u8]) -> Result<Self, ProofError> {
        let go = || {
            let mut r = Reader::new(bytes);
            read_header(&mut r, kind)?;
            let first = EqFirst::read(&mut r, pp)?;
            let (z1, z2) = read_responses(&mut r, pp)?;
            r.finish()?;
            Ok(EqProof { kind, first, z1, z2 })
        };
        go().map_err(enc_err(kind))
    }
}

//! Compact range: every coefficient of a committed message lies in `[0, 2^beta)`.
//!
//! The bits of all coefficients are committed as `beta` polynomials `vb`.
//! One garbage polynomial `h` with zero constant coefficient carries three
//! relations at once, each a constant-coefficient inner product:
//! the bits are binary, they reconstruct the message, and an approximate
//! range projection `z2 = y2 + R vb` is consistent. A quadratic ABDLOP
//! check ties `h` to the committed openings.
//!
//! Layout: coefficient `j` of the message sits in `vb[j / (d/beta)]` at
//! coefficients `k beta .. k beta + beta` with `k = j mod (d/beta)`,
//! least significant bit first.

use rand::RngCore;

use super::common::*;
use crate::commit::{Commitment, CompactKeys, PublicKey, PublicParams};
use crate::params::ParamSet;
use crate::ring::vec::{vec_add, vec_dot, vec_sub};
use crate::ring::{Poly, Ring};
use crate::sampling::{chi_polys, ProjMatrix};
use crate::transcript::Transcript;
use crate::wire::{self, Reader};

const KIND: ProofKind = ProofKind::PoAc;

pub const CHECK_NORM: &str = "(a) ||z1||, ||z3|| bounds";
pub const CHECK_PROJ: &str = "(b) ||z2|| <= 1.64 sqrt(256) sigma2";
pub const CHECK_H: &str = "(c) constant coefficient of h is 0";
pub const CHECK_OPEN: &str = "(d) A_a z1 = w1 + c u0, A z3 = w2 + c com0";
pub const CHECK_QUAD: &str = "(e) quadratic relation";

pub struct PoaCompactStatement<'a> {
    pub pk: &'a PublicKey,
    pub com: &'a Commitment,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoaCompactProof {
    pub u0: Vec<Poly>,
    pub u_y2: Vec<Poly>,
    pub u_g: Poly,
    pub u_bin: Vec<Poly>,
    pub z2: Vec<i128>,
    pub h: Poly,
    pub u_g1: Poly,
    pub w1: Vec<Poly>,
    pub w2: Vec<Poly>,
    pub v: Poly,
    pub z1: Vec<Poly>,
    pub z3: Vec<Poly>,
}

/// Bit polynomials of `values` (two's complement, truncated to `beta` bits).
pub fn bit_polys(ring: &Ring, p: &ParamSet, values: &[i128]) -> Vec<Poly> {
    let beta = p.beta_bits as usize;
    let per = ring.d / beta;
    let mut vb = vec![ring.zero(); beta];
    for (j, &x) in values.iter().enumerate() {
        let (a, k) = (j / per, j % per);
        for i in 0..beta {
            vb[a].0[k * beta + i] = ((x >> i) & 1) as u128;
        }
    }
    vb
}

/// Verifier challenges and the functionals built from them.
struct Fun {
    /// `K_alpha`, one per bit polynomial.
    k: Vec<Poly>,
    pd: Vec<Poly>,
    /// `sigma_{-1}(sum_j d''_j X^j)`.
    sdv: Poly,
    dp: Vec<u128>,
}

impl Fun {
    fn new(ring: &Ring, p: &ParamSet, rm: &ProjMatrix, d: &[u128], dp: Vec<u128>, dpp: &[u128]) -> Self {
        let md = &ring.md;
        let beta = p.beta_bits as usize;
        let per = ring.d / beta;
        let rho = proj_functional(ring, rm, d);
        let neg_ones = ring.sigma_m1(&Poly(vec![md.neg(1); ring.d]));
        let k = (0..beta)
            .map(|a| {
                let mut dh = ring.zero();
                for kk in 0..per {
                    let mut pow = 1u128;
                    for i in 0..beta {
                        dh.0[kk * beta + i] = md.mul(dpp[a * per + kk], pow);
                        pow = md.add(pow, pow);
                    }
                }
                let t = ring.add(&rho[a], &ring.scale(&neg_ones, dp[a]));
                ring.add(&t, &ring.sigma_m1(&dh))
            })
            .collect();
        Fun { k, pd: sigma_pack(ring, d), sdv: ring.sigma_m1(&Poly(dpp.to_vec())), dp }
    }

    /// `sum K_a x_a + pd^T y2 - sdv v`.
    fn lin(&self, ring: &Ring, x: &[Poly], y2: &[Poly], v: &Poly) -> Poly {
        let a = ring.add(&vec_dot(ring, &self.k, x), &vec_dot(ring, &self.pd, y2));
        ring.sub(&a, &ring.mul(&self.sdv, v))
    }

    /// `sum d'_a sigma(x_a) y_a`.
    fn quad(&self, ring: &Ring, x: &[Poly], y: &[Poly]) -> Poly {
        let mut acc = ring.zero();
        for ((a, b), &s) in x.iter().zip(y).zip(&self.dp) {
            ring.add_assign(&mut acc, &ring.scale(&ring.mul(&ring.sigma_m1(a), b), s));
        }
        acc
    }
}

fn start(pp: &PublicParams, ctx: &[u8], st: &PoaCompactStatement) -> Transcript {
    let ring = &pp.ring;
    let mut t = transcript(KIND, ctx);
    absorb_pk(&mut t, ring, st.pk);
    absorb_com(&mut t, "com", ring, st.com);
    t
}

fn absorb_first(t: &mut Transcript, ring: &Ring, u0: &[Poly], u_y2: &[Poly], u_g: &Poly, u_bin: &[Poly]) {
    t.absorb_polys("u0", ring, u0);
    t.absorb_polys("u_y2", ring, u_y2);
    t.absorb_polys("u_g", ring, std::slice::from_ref(u_g));
    t.absorb_polys("u_bin", ring, u_bin);
}

fn derive_fun(t: &mut Transcript, ring: &Ring, p: &ParamSet, rm: &ProjMatrix, z2: &[i128]) -> Fun {
    t.absorb_ints("z2", z2);
    let q = ring.q();
    let d = scalars(t, "d", q, 256);
    let dp = scalars(t, "d'", q, p.beta_bits as usize);
    let dpp = scalars(t, "d''", q, ring.d);
    Fun::new(ring, p, rm, &d, dp, &dpp)
}

fn absorb_third(t: &mut Transcript, ring: &Ring, pf: (&Poly, &Poly, &[Poly], &[Poly], &Poly)) {
    let (h, u_g1, w1, w2, v) = pf;
    t.absorb_polys("h", ring, std::slice::from_ref(h));
    t.absorb_polys("u_g1", ring, std::slice::from_ref(u_g1));
    t.absorb_polys("w1", ring, w1);
    t.absorb_polys("w2", ring, w2);
    t.absorb_polys("v", ring, std::slice::from_ref(v));
}

fn neg_mul(ring: &Ring, m: &crate::ring::vec::Mat, y: &[Poly]) -> Vec<Poly> {
    m.mul_vec(ring, y).iter().map(|x| ring.neg(x)).collect()
}

/// `100^2 ||z2||^2 <= 164^2 * 256 * sigma2^2`.
fn proj_ok(z2: &[i128], sigma_sq: u128) -> bool {
    let mut acc: u128 = 0;
    for &x in z2 {
        let a = x.unsigned_abs();
        if a >= 1 << 60 {
            return false;
        }
        acc = acc.saturating_add(a * a);
    }
    acc.saturating_mul(100 * 100) <= (164u128 * 164 * 256).saturating_mul(sigma_sq)
}

pub fn prove_poa_compact<R: RngCore + ?Sized>(
    pp: &PublicParams,
    ctx: &[u8],
    st: &PoaCompactStatement,
    r: &[Poly],
    values: &[i128],
    rng: &mut R,
    opts: &ProveOptions,
) -> Result<PoaCompactProof, ProofError> {
    let (ring, p) = pp_ring(pp);
    let n = p.n_rand();
    let beta = p.beta_bits as usize;
    if r.len() != n || values.len() > ring.d || beta == 0 || ring.d % beta != 0 {
        return Err(shape(KIND, "randomness or value count"));
    }
    let ck: &CompactKeys = pp.compact();
    let [s1, s2, s3] = [0, 1, 2].map(|i| p.sigma_sq.poa_compact.sq[i]);
    let mu = p.compact_mu();
    let vb = bit_polys(ring, p, values);
    let bits: Vec<i128> = vb.iter().flat_map(|x| x.0.iter().map(|&b| b as i128)).collect();
    let vpoly = Poly(values.iter().map(|&x| ring.md.from_i128(x)).chain(std::iter::repeat(0)).take(ring.d).collect());
    with_restarts(KIND, opts, || {
        let mut t = start(pp, ctx, st);
        let s = chi_polys(ring, rng, mu);
        let y2 = mask_ints(rng, s2, 256);
        let g = garbage_mask(ring, rng, 1, opts.fault);
        let u0 = ck.a_a.mul_vec(ring, &s);
        let u_y2 = vec_add(ring, &ck.b_y2.mul_vec(ring, &s), &pack_i(ring, &y2));
        let u_g = ring.add(&ck.b_g.mul_vec(ring, &s)[0], &g);
        let u_bin = vec_add(ring, &ck.b_bin.mul_vec(ring, &s), &vb);
        absorb_first(&mut t, ring, &u0, &u_y2, &u_g, &u_bin);
        let rm = proj_challenge(&mut t, "R", beta * ring.d);
        let rl = rm.mul(&bits);
        let z2: Vec<i128> = y2.iter().zip(&rl).map(|(a, b)| a + b).collect();
        if !rej_ints(rng, opts, &z2, &rl, s2, p.rej_m) {
            return Ok(None);
        }
        let fun = derive_fun(&mut t, ring, p, &rm, &z2);
        let pz2 = vec_dot(ring, &fun.pd, &pack_i(ring, &z2));
        let lin = fun.lin(ring, &vb, &pack_i(ring, &y2), &vpoly);
        let mut h = ring.add(&ring.sub(&ring.add(&g, &lin), &pz2), &fun.quad(ring, &vb, &vb));
        apply_h_fault(&mut h, 1, opts.fault);
        // masked openings
        let y1 = mask(ring, rng, s1, mu);
        let y3 = mask(ring, rng, s3, n);
        let y_bin = neg_mul(ring, &ck.b_bin, &y1);
        let y_y2 = neg_mul(ring, &ck.b_y2, &y1);
        let y_g = ring.neg(&ck.b_g.mul_vec(ring, &y1)[0]);
        let y_v = ring.neg(&pp.b.mul_vec(ring, &y3)[0]);
        let cross = ring.add(&fun.quad(ring, &vb, &y_bin), &fun.quad(ring, &y_bin, &vb));
        let g1 = ring.add(&ring.add(&fun.lin(ring, &y_bin, &y_y2, &y_v), &cross), &y_g);
        let g0 = fun.quad(ring, &y_bin, &y_bin);
        let u_g1 = ring.add(&ck.b_g1.mul_vec(ring, &s)[0], &g1);
        let v = ring.add(&g0, &ck.b_g1.mul_vec(ring, &y1)[0]);
        let w1 = ck.a_a.mul_vec(ring, &y1);
        let w2 = pp.a.mul_vec(ring, &y3);
        absorb_third(&mut t, ring, (&h, &u_g1, &w1, &w2, &v));
        let c = stable_challenge(&mut t, ring, p);
        let cs = cmul(ring, &c, &s);
        let cr = cmul(ring, &c, r);
        let z1 = vec_add(ring, &y1, &cs);
        let z3 = vec_add(ring, &y3, &cr);
        if !rej_polys(ring, rng, opts, &z1, &cs, s1, p.rej_m) || !rej_polys(ring, rng, opts, &z3, &cr, s3, p.rej_m)
        {
            return Ok(None);
        }
        Ok(Some(PoaCompactProof { u0, u_y2, u_g, u_bin, z2, h, u_g1, w1, w2, v, z1, z3 }))
    })
}

pub fn verify_poa_compact(
    pp: &PublicParams,
    ctx: &[u8],
    st: &PoaCompactStatement,
    pf: &PoaCompactProof,
) -> Result<(), ProofError> {
    let (ring, p) = pp_ring(pp);
    let beta = p.beta_bits as usize;
    if beta == 0 || ring.d % beta != 0 {
        return Err(shape(KIND, "beta does not divide d"));
    }
    check_dims(p, pf)?;
    let ck = pp.compact();
    let [s1, s2, s3] = [0, 1, 2].map(|i| p.sigma_sq.poa_compact.sq[i]);
    let mut t = start(pp, ctx, st);
    absorb_first(&mut t, ring, &pf.u0, &pf.u_y2, &pf.u_g, &pf.u_bin);
    let rm = proj_challenge(&mut t, "R", beta * ring.d);
    let fun = derive_fun(&mut t, ring, p, &rm, &pf.z2);
    absorb_third(&mut t, ring, (&pf.h, &pf.u_g1, &pf.w1, &pf.w2, &pf.v));
    let c = stable_challenge(&mut t, ring, p);

    if !l2_ok(ring, &pf.z1, s1) || !l2_ok(ring, &pf.z3, s3) {
        return Err(fail(KIND, CHECK_NORM));
    }
    if !proj_ok(&pf.z2, s2) {
        return Err(fail(KIND, CHECK_PROJ));
    }
    if pf.h.0[0] != 0 {
        return Err(fail(KIND, CHECK_H));
    }
    if ck.a_a.mul_vec(ring, &pf.z1) != vec_add(ring, &pf.w1, &cmul(ring, &c, &pf.u0))
        || pp.a.mul_vec(ring, &pf.z3) != vec_add(ring, &pf.w2, &cmul(ring, &c, &st.com.c0))
    {
        return Err(fail(KIND, CHECK_OPEN));
    }
    let cm = |x: &Poly| ring.mul(&c, x);
    let z_bin = vec_sub(ring, &cmul(ring, &c, &pf.u_bin), &ck.b_bin.mul_vec(ring, &pf.z1));
    let z_y2 = vec_sub(ring, &cmul(ring, &c, &pf.u_y2), &ck.b_y2.mul_vec(ring, &pf.z1));
    let z_g = ring.sub(&cm(&pf.u_g), &ck.b_g.mul_vec(ring, &pf.z1)[0]);
    let z_v = ring.sub(&cm(&st.com.c3), &pp.b.mul_vec(ring, &pf.z3)[0]);
    let f = ring.sub(&cm(&pf.u_g1), &ck.b_g1.mul_vec(ring, &pf.z1)[0]);
    let hz = ring.add(&pf.h, &vec_dot(ring, &fun.pd, &pack_i(ring, &pf.z2)));
    let mut lhs = ring.add(&cm(&fun.lin(ring, &z_bin, &z_y2, &z_v)), &fun.quad(ring, &z_bin, &z_bin));
    ring.add_assign(&mut lhs, &cm(&z_g));
    ring.sub_assign(&mut lhs, &cm(&cm(&hz)));
    ring.sub_assign(&mut lhs, &f);
    if lhs != pf.v {
        return Err(fail(KIND, CHECK_QUAD));
    }
    Ok(())
}

fn check_dims(p: &ParamSet, pf: &PoaCompactProof) -> Result<(), ProofError> {
    let ok = pf.u0.len() == p.kappa
        && pf.u_y2.len() == p.proj_polys()
        && pf.u_bin.len() == p.beta_bits as usize
        && pf.z2.len() == 256
        && pf.w1.len() == p.kappa
        && pf.w2.len() == p.kappa
        && pf.z1.len() == p.compact_mu()
        && pf.z3.len() == p.n_rand();
    if ok {
        Ok(())
    } else {
        Err(shape(KIND, "proof dimensions"))
    }
}

impl PoaCompactProof {
    pub fn encode(&self, pp: &PublicParams) -> Vec<u8> {
        let ring = &pp.ring;
        let mut out = header(KIND);
        wire::put_polys(&mut out, ring, &self.u0);
        wire::put_polys(&mut out, ring, &self.u_y2);
        wire::put_polys(&mut out, ring, std::slice::from_ref(&self.u_g));
        wire::put_polys(&mut out, ring, &self.u_bin);
        put_int_section(&mut out, &self.z2);
        wire::put_polys(&mut out, ring, std::slice::from_ref(&self.h));
        wire::put_polys(&mut out, ring, std::slice::from_ref(&self.u_g1));
        wire::put_polys(&mut out, ring, &self.w1);
        wire::put_polys(&mut out, ring, &self.w2);
        wire::put_polys(&mut out, ring, std::slice::from_ref(&self.v));
        wire::put_short_polys(&mut out, ring, &self.z1);
        wire::put_short_polys(&mut out, ring, &self.z3);
        out
    }

    pub fn decode(pp: &PublicParams, bytes: &[u8]) -> Result<Self, ProofError> {
        let (ring, p) = pp_ring(pp);
        let k = p.kappa;
        let go = || {
            let mut r = Reader::new(bytes);
            read_header(&mut r, KIND)?;
            let one = |r: &mut Reader| r.polys(ring, Some(1)).map(|mut v| v.pop().unwrap());
            let pf = PoaCompactProof {
                u0: r.polys(ring, Some(k))?,
                u_y2: r.polys(ring, Some(p.proj_polys()))?,
                u_g: one(&mut r)?,
                u_bin: r.polys(ring, Some(p.beta_bits as usize))?,
                z2: read_int_section(&mut r, 256)?,
                h: one(&mut r)?,
                u_g1: one(&mut r)?,
                w1: r.polys(ring, Some(k))?,
                w2: r.polys(ring, Some(k))?,
                v: one(&mut r)?,
                z1: r.short_polys(ring, Some(p.compact_mu()))?,
                z3: r.short_polys(ring, Some(p.n_rand()))?,
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

    fn run(values: &[i128], opts: ProveOptions, seed: u64) -> Result<(), ProofError> {
        let f = fx();
        let ring = &f.pp.ring;
        let mut g = rng(seed);
        let mut v = ring.zero();
        for (j, &x) in values.iter().enumerate() {
            v.0[j] = ring.md.from_i128(x);
        }
        let (com, r) = commit_poly(f, &v, &mut g);
        let st = PoaCompactStatement { pk: &f.pk, com: &com };
        let pf = prove_poa_compact(&f.pp, b"p", &st, &r, values, &mut g, &opts).unwrap();
        assert_eq!(PoaCompactProof::decode(&f.pp, &pf.encode(&f.pp)).unwrap(), pf);
        verify_poa_compact(&f.pp, b"p", &st, &pf)
    }

    #[test]
    fn in_range_vector_verifies() {
        let top = (1i128 << fx().pp.params.beta_bits) - 1;
        let d = fx().pp.params.d as i128;
        let vals: Vec<i128> = (0..d).map(|j| (j * 977) % (top + 1)).collect();
        run(&vals, ProveOptions::default(), 81).unwrap();
        run(&[top, 0, 1], ProveOptions::default(), 82).unwrap();
    }

    #[test]
    fn negative_entry_fails_h_check() {
        assert_eq!(run(&[3, -1], ProveOptions::default(), 83).unwrap_err().check(), Some(CHECK_H));
    }

    #[test]
    fn forced_h_with_negative_entry_fails_quadratic_check() {
        let e = run(&[3, -1], ProveOptions::with_fault(Fault::ZeroHConstant), 84).unwrap_err();
        assert_eq!(e.check(), Some(CHECK_QUAD));
    }

    #[test]
    fn bit_layout() {
        let f = fx();
        let (ring, p) = (&f.pp.ring, &f.pp.params);
        let beta = p.beta_bits as usize;
        let per = ring.d / beta;
        let vb = bit_polys(ring, p, &[0, 0, 0, 5]);
        let (a, k) = (3 / per, 3 % per);
        assert_eq!(vb[a].0[k * beta], 1);
        assert_eq!(vb[a].0[k * beta + 1], 0);
        assert_eq!(vb[a].0[k * beta + 2], 1);
        assert_eq!(vb.iter().flat_map(|x| &x.0).filter(|&&b| b == 1).count(), 2);
    }
}

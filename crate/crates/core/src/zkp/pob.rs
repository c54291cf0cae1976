//! Balance: the commitments of one asset column sum to a commitment of zero.
//!
//! ```text
//! P: y <- D^N, w = A y, u = B^T y          V: c
//! P: z = y + c sum(r)                      V: ||z||, A z = w + c sum(com0),
//!                                             B^T z = u + c sum(com3)
//! ```

use rand::RngCore;

use super::common::*;
use crate::commit::{sum_commitments, Commitment, PublicParams};
use crate::ring::{vec::vec_add, vec::vec_sub, Poly};
use crate::wire::{self, Reader};

const KIND: ProofKind = ProofKind::PoB;

pub const CHECK_NORM: &str = "(a) ||z|| bound";
pub const CHECK_AJTAI: &str = "(b) A z = w + c sum(com0)";
pub const CHECK_BALANCE: &str = "(c) B^T z = u + c sum(com3)";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PobProof {
    pub w: Vec<Poly>,
    pub u: Poly,
    pub z: Vec<Poly>,
}

/// First move: mask and its images.
pub struct PobFirst {
    pub y: Vec<Poly>,
    pub w: Vec<Poly>,
    pub u: Poly,
}

pub fn pob_first<R: RngCore + ?Sized>(pp: &PublicParams, rng: &mut R, n_coms: usize) -> PobFirst {
    let (ring, p) = pp_ring(pp);
    let y = mask(ring, rng, p.pob_sigma_sq(n_coms), p.n_rand());
    let w = pp.a.mul_vec(ring, &y);
    let u = pp.b.mul_vec(ring, &y).pop().unwrap();
    PobFirst { y, w, u }
}

fn fs_challenge(pp: &PublicParams, ctx: &[u8], coms: &[Commitment], w: &[Poly], u: &Poly) -> Poly {
    let ring = &pp.ring;
    let mut t = transcript(KIND, ctx);
    t.absorb_u64("count", coms.len() as u64);
    for c in coms {
        absorb_com(&mut t, "com", ring, c);
    }
    t.absorb_polys("w", ring, w);
    t.absorb_polys("u", ring, std::slice::from_ref(u));
    challenge(&mut t, ring, &pp.params)
}

pub fn prove_pob<R: RngCore + ?Sized>(
    pp: &PublicParams,
    ctx: &[u8],
    coms: &[Commitment],
    r_sum: &[Poly],
    rng: &mut R,
    opts: &ProveOptions,
) -> Result<PobProof, ProofError> {
    let (ring, p) = pp_ring(pp);
    if coms.is_empty() || r_sum.len() != p.n_rand() {
        return Err(shape(KIND, "empty column or randomness length"));
    }
    let sigma_sq = p.pob_sigma_sq(coms.len());
    with_restarts(KIND, opts, || {
        let PobFirst { y, w, u } = pob_first(pp, rng, coms.len());
        let c = fs_challenge(pp, ctx, coms, &w, &u);
        let cr = cmul(ring, &c, r_sum);
        let z = vec_add(ring, &y, &cr);
        if !rej_polys(ring, rng, opts, &z, &cr, sigma_sq, p.rej_m) {
            return Ok(None);
        }
        Ok(Some(PobProof { w, u, z }))
    })
}

/// Verifier checks against an explicit challenge.
pub fn pob_check(
    pp: &PublicParams,
    coms: &[Commitment],
    w: &[Poly],
    u: &Poly,
    c: &Poly,
    z: &[Poly],
) -> Result<(), ProofError> {
    let (ring, p) = pp_ring(pp);
    if z.len() != p.n_rand() || w.len() != p.kappa || coms.is_empty() {
        return Err(shape(KIND, "response or commitment length"));
    }
    if !l2_ok(ring, z, p.pob_sigma_sq(coms.len())) {
        return Err(fail(KIND, CHECK_NORM));
    }
    let s = sum_commitments(pp, coms);
    if pp.a.mul_vec(ring, z) != vec_add(ring, w, &cmul(ring, c, &s.c0)) {
        return Err(fail(KIND, CHECK_AJTAI));
    }
    let bz = pp.b.mul_vec(ring, z).pop().unwrap();
    if bz != ring.add(u, &ring.mul(c, &s.c3)) {
        return Err(fail(KIND, CHECK_BALANCE));
    }
    Ok(())
}

pub fn verify_pob(
    pp: &PublicParams,
    ctx: &[u8],
    coms: &[Commitment],
    proof: &PobProof,
) -> Result<(), ProofError> {
    let c = fs_challenge(pp, ctx, coms, &proof.w, &proof.u);
    pob_check(pp, coms, &proof.w, &proof.u, &c, &proof.z)
}

/// Honest-verifier simulator: picks `z` first and solves for `(w, u)`.
pub fn simulate_pob<R: RngCore + ?Sized>(
    pp: &PublicParams,
    coms: &[Commitment],
    c: &Poly,
    rng: &mut R,
) -> (Vec<Poly>, Poly, Vec<Poly>) {
    let (ring, p) = pp_ring(pp);
    let z = mask(ring, rng, p.pob_sigma_sq(coms.len()), p.n_rand());
    let s = sum_commitments(pp, coms);
    let w = vec_sub(ring, &pp.a.mul_vec(ring, &z), &cmul(ring, c, &s.c0));
    let u = ring.sub(&pp.b.mul_vec(ring, &z)[0], &ring.mul(c, &s.c3));
    (w, u, z)
}

impl PobProof {
    pub fn encode(&self, pp: &PublicParams) -> Vec<u8> {
        let ring = &pp.ring;
        let mut out = header(KIND);
        wire::put_polys(&mut out, ring, &self.w);
        wire::put_polys(&mut out, ring, std::slice::from_ref(&self.u));
        wire::put_short_polys(&mut out, ring, &self.z);
        out
    }

    pub fn decode(pp: &PublicParams, bytes: &[u8]) -> Result<Self, ProofError> {
        let (ring, p) = pp_ring(pp);
        let go = || {
            let mut r = Reader::new(bytes);
            read_header(&mut r, KIND)?;
            let w = r.polys(ring, Some(p.kappa))?;
            let u = r.polys(ring, Some(1))?.pop().unwrap();
            let z = r.short_polys(ring, Some(p.n_rand()))?;
            r.finish()?;
            Ok(PobProof { w, u, z })
        };
        go().map_err(enc_err(KIND))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::vec::vec_add;
    use crate::zkp::fixture::*;

    fn column(f: &Fx, vals: &[i128], seed: u64) -> (Vec<Commitment>, Vec<Poly>) {
        let ring = &f.pp.ring;
        let mut rng = rng(seed);
        let mut r_sum = vec![ring.zero(); f.pp.params.n_rand()];
        let coms = vals
            .iter()
            .map(|&v| {
                let (c, r) = commit(f, v, &mut rng);
                r_sum = vec_add(ring, &r_sum, &r);
                c
            })
            .collect();
        (coms, r_sum)
    }

    #[test]
    fn balanced_column_verifies_and_roundtrips() {
        let f = fx();
        let (coms, r) = column(f, &[-7, 3, 4], 1);
        let pf = prove_pob(&f.pp, b"t", &coms, &r, &mut rng(2), &ProveOptions::default()).unwrap();
        verify_pob(&f.pp, b"t", &coms, &pf).unwrap();
        let back = PobProof::decode(&f.pp, &pf.encode(&f.pp)).unwrap();
        assert_eq!(back, pf);
        assert!(verify_pob(&f.pp, b"other", &coms, &pf).is_err());
    }

    #[test]
    fn unbalanced_column_fails_balance_check() {
        let f = fx();
        let (coms, r) = column(f, &[-7, 3, 5], 3);
        let pf = prove_pob(&f.pp, b"t", &coms, &r, &mut rng(4), &ProveOptions::default()).unwrap();
        assert_eq!(verify_pob(&f.pp, b"t", &coms, &pf).unwrap_err().check(), Some(CHECK_BALANCE));
    }

    #[test]
    fn tampered_response_fails_ajtai_check() {
        let f = fx();
        let ring = &f.pp.ring;
        let (coms, r) = column(f, &[1, -1], 5);
        let mut pf = prove_pob(&f.pp, b"t", &coms, &r, &mut rng(6), &ProveOptions::default()).unwrap();
        pf.z[0] = ring.add(&pf.z[0], &ring.one());
        assert_eq!(verify_pob(&f.pp, b"t", &coms, &pf).unwrap_err().check(), Some(CHECK_AJTAI));
    }

    #[test]
    fn simulator_output_verifies() {
        let f = fx();
        let (coms, _) = column(f, &[2, -2], 7);
        let c = crate::sampling::sample_challenge(&mut rng(8), f.pp.params.d, f.pp.params.omega).to_poly(&f.pp.ring);
        let (w, u, z) = simulate_pob(&f.pp, &coms, &c, &mut rng(9));
        pob_check(&f.pp, &coms, &w, &u, &c, &z).unwrap();
    }
}

//! Honest statements for every proof kind, with a uniform prove/verify
//! interface. Used by benchmarks, the acceptance suite and fuzzing.

use rand::{Rng, RngCore};

use super::eq::{prove_poe, prove_pokw, verify_poe, verify_pokw, EqProof, PoeStatement, PokwStatement};
use super::or::{prove_or, verify_or, OrProof, OrStatement, OrWitness};
use super::poa::{prove_poa, verify_poa, PoaProof, PoaStatement};
use super::poa_compact::{prove_poa_compact, verify_poa_compact, PoaCompactProof, PoaCompactStatement};
use super::pob::{prove_pob, verify_pob, PobProof};
use super::poc::{prove_poc, verify_poc, PocProof, PocStatement};
use super::poe2::{prove_poe2, verify_poe2, Poe2Proof, Poe2Statement};
use super::{ProofError, ProofKind, ProveOptions};
use crate::commit::{commit_tx, Commitment, PublicKey, PublicParams, SecretKey};
use crate::ring::vec::vec_add;
use crate::ring::Poly;
use crate::sampling::chi_polys;

/// A proof of any kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnyProof {
    PoB(PobProof),
    PoC(PocProof),
    PoE(EqProof),
    PoKW(EqProof),
    PoA(PoaProof),
    PoAc(PoaCompactProof),
    PoE2(Poe2Proof),
    Or(OrProof),
}

impl AnyProof {
    pub fn kind(&self) -> ProofKind {
        match self {
            AnyProof::PoB(_) => ProofKind::PoB,
            AnyProof::PoC(_) => ProofKind::PoC,
            AnyProof::PoE(_) => ProofKind::PoE,
            AnyProof::PoKW(_) => ProofKind::PoKW,
            AnyProof::PoA(_) => ProofKind::PoA,
            AnyProof::PoAc(_) => ProofKind::PoAc,
            AnyProof::PoE2(_) => ProofKind::PoE2,
            AnyProof::Or(_) => ProofKind::Or,
        }
    }

    pub fn encode(&self, pp: &PublicParams) -> Vec<u8> {
        match self {
            AnyProof::PoB(p) => p.encode(pp),
            AnyProof::PoC(p) => p.encode(pp),
            AnyProof::PoE(p) | AnyProof::PoKW(p) => p.encode(pp),
            AnyProof::PoA(p) => p.encode(pp),
            AnyProof::PoAc(p) => p.encode(pp),
            AnyProof::PoE2(p) => p.encode(pp),
            AnyProof::Or(p) => p.encode(pp),
        }
    }

    pub fn decode(pp: &PublicParams, kind: ProofKind, bytes: &[u8]) -> Result<Self, ProofError> {
        Ok(match kind {
            ProofKind::PoB => AnyProof::PoB(PobProof::decode(pp, bytes)?),
            ProofKind::PoC => AnyProof::PoC(PocProof::decode(pp, bytes)?),
            ProofKind::PoE => AnyProof::PoE(EqProof::decode(pp, kind, bytes)?),
            ProofKind::PoKW => AnyProof::PoKW(EqProof::decode(pp, kind, bytes)?),
            ProofKind::PoA => AnyProof::PoA(PoaProof::decode(pp, bytes)?),
            ProofKind::PoAc => AnyProof::PoAc(PoaCompactProof::decode(pp, bytes)?),
            ProofKind::PoE2 => AnyProof::PoE2(Poe2Proof::decode(pp, bytes)?),
            ProofKind::Or => AnyProof::Or(OrProof::decode(pp, bytes)?),
        })
    }
}

/// Which branch an OR prover knows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrBranch {
    Poe,
    Poe2,
}

/// Statement and witness for one proof kind.
///
/// `com` and `com2` commit to the same `value` under `r` and `r2`. PoB uses
/// the column `[com, neg]` with `neg` committing `-value` under `r2`. PoA'
/// uses `com` as a compact commitment of `values`.
#[derive(Clone, Debug)]
pub struct Instance {
    pub kind: ProofKind,
    pub ctx: Vec<u8>,
    pub sk: SecretKey,
    pub pk: PublicKey,
    pub value: i128,
    pub values: Vec<i128>,
    pub r: Vec<Poly>,
    pub r2: Vec<Poly>,
    pub com: Commitment,
    pub com2: Commitment,
    pub column: Vec<Commitment>,
    pub branch: OrBranch,
}

impl Instance {
    /// A fresh honest instance. Values are uniform in the provable range.
    pub fn honest<R: RngCore + ?Sized>(
        pp: &PublicParams,
        kind: ProofKind,
        sk: &SecretKey,
        pk: &PublicKey,
        rng: &mut R,
    ) -> Instance {
        let (ring, p) = (&pp.ring, &pp.params);
        let nr = p.n_rand();
        let r = chi_polys(ring, rng, nr);
        let r2 = chi_polys(ring, rng, nr);
        let value = rng.random_range(0..1i128 << p.value_bits);
        let values: Vec<i128> = (0..p.d).map(|_| rng.random_range(0..1i128 << p.beta_bits)).collect();
        let msg = if kind == ProofKind::PoAc {
            Poly(values.iter().map(|&x| x as u128).collect())
        } else {
            ring.constant(value as u128)
        };
        let com = commit_tx(pp, pk, &msg, &r).expect("dimensions");
        let com2 = commit_tx(pp, pk, &msg, &r2).expect("dimensions");
        let neg = commit_tx(pp, pk, &ring.neg(&msg), &r2).expect("dimensions");
        let branch = if rng.random::<bool>() { OrBranch::Poe } else { OrBranch::Poe2 };
        Instance {
            kind,
            ctx: b"pqetl/instance".to_vec(),
            sk: sk.clone(),
            pk: pk.clone(),
            value,
            values,
            r,
            r2,
            column: vec![com.clone(), neg],
            com,
            com2,
            branch,
        }
    }

    fn poe(&self) -> PoeStatement<'_> {
        PoeStatement { pk: &self.pk, com: &self.com, com2: &self.com2 }
    }

    fn poe2(&self) -> Poe2Statement<'_> {
        Poe2Statement { pk: &self.pk, com: &self.com, com2: &self.com2 }
    }

    pub fn prove<R: RngCore + ?Sized>(
        &self,
        pp: &PublicParams,
        rng: &mut R,
        opts: &ProveOptions,
    ) -> Result<AnyProof, ProofError> {
        let (ctx, ring) = (&self.ctx[..], &pp.ring);
        Ok(match self.kind {
            ProofKind::PoB => {
                let rs = vec_add(ring, &self.r, &self.r2);
                AnyProof::PoB(prove_pob(pp, ctx, &self.column, &rs, rng, opts)?)
            }
            ProofKind::PoC => {
                let st = PocStatement { pk: &self.pk, com: &self.com, compact: false };
                AnyProof::PoC(prove_poc(pp, ctx, &st, &self.r, &ring.constant(self.value as u128), rng, opts)?)
            }
            ProofKind::PoE => AnyProof::PoE(prove_poe(pp, ctx, &self.poe(), &self.sk, rng, opts)?),
            ProofKind::PoKW => AnyProof::PoKW(prove_pokw(pp, ctx, &PokwStatement { pk: &self.pk }, &self.sk, rng, opts)?),
            ProofKind::PoA => {
                let st = PoaStatement { pk: &self.pk, com: &self.com };
                AnyProof::PoA(prove_poa(pp, ctx, &st, &self.r, self.value, rng, opts)?)
            }
            ProofKind::PoAc => {
                let st = PoaCompactStatement { pk: &self.pk, com: &self.com };
                AnyProof::PoAc(prove_poa_compact(pp, ctx, &st, &self.r, &self.values, rng, opts)?)
            }
            ProofKind::PoE2 => AnyProof::PoE2(prove_poe2(pp, ctx, &self.poe2(), &self.r, &self.r2, rng, opts)?),
            ProofKind::Or => {
                let st = OrStatement { poe: self.poe(), poe2: self.poe2() };
                let w = match self.branch {
                    OrBranch::Poe => OrWitness::Poe { sk: &self.sk },
                    OrBranch::Poe2 => OrWitness::Poe2 { r: &self.r, r2: &self.r2 },
                };
                AnyProof::Or(prove_or(pp, ctx, &st, &w, rng, opts)?)
            }
        })
    }

    pub fn verify(&self, pp: &PublicParams, proof: &AnyProof) -> Result<(), ProofError> {
        let ctx = &self.ctx[..];
        match proof {
            AnyProof::PoB(p) => verify_pob(pp, ctx, &self.column, p),
            AnyProof::PoC(p) => verify_poc(pp, ctx, &PocStatement { pk: &self.pk, com: &self.com, compact: false }, p),
            AnyProof::PoE(p) => verify_poe(pp, ctx, &self.poe(), p),
            AnyProof::PoKW(p) => verify_pokw(pp, ctx, &PokwStatement { pk: &self.pk }, p),
            AnyProof::PoA(p) => verify_poa(pp, ctx, &PoaStatement { pk: &self.pk, com: &self.com }, p),
            AnyProof::PoAc(p) => verify_poa_compact(pp, ctx, &PoaCompactStatement { pk: &self.pk, com: &self.com }, p),
            AnyProof::PoE2(p) => verify_poe2(pp, ctx, &self.poe2(), p),
            AnyProof::Or(p) => verify_or(pp, ctx, &OrStatement { poe: self.poe(), poe2: self.poe2() }, p),
        }
    }

    /// Decodes `bytes` as this instance's kind and verifies.
    pub fn verify_bytes(&self, pp: &PublicParams, bytes: &[u8]) -> Result<(), ProofError> {
        self.verify(pp, &AnyProof::decode(pp, self.kind, bytes)?)
    }
}

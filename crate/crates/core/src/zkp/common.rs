//! Pieces shared by every protocol: errors, prover options, masks, exact norm
//! checks, challenge derivation and the proof envelope.

use rand::RngCore;
use thiserror::Error;

use crate::commit::{Commitment, PublicKey, PublicParams};
use crate::params::ParamSet;
use crate::ring::{vec::flatten_centered, vec::pack_residues, Poly, Ring};
use crate::sampling::{
    rej, sample_challenge, sample_challenge_stable, sample_proj_matrix, uniform_residue,
    GaussianSampler, ProjMatrix,
};
use crate::transcript::Transcript;
use crate::wire::{self, Reader, WireError};

/// Wire format version carried after the kind byte.
pub const VERSION: u8 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum ProofKind {
    PoB = 1,
    PoC = 2,
    PoE = 3,
    PoKW = 4,
    PoA = 5,
    PoAc = 6,
    PoE2 = 7,
    Or = 8,
}

impl ProofKind {
    pub const ALL: [ProofKind; 8] = [
        ProofKind::PoB,
        ProofKind::PoC,
        ProofKind::PoE,
        ProofKind::PoKW,
        ProofKind::PoA,
        ProofKind::PoAc,
        ProofKind::PoE2,
        ProofKind::Or,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProofKind::PoB => "PoB",
            ProofKind::PoC => "PoC",
            ProofKind::PoE => "PoE",
            ProofKind::PoKW => "PoKW",
            ProofKind::PoA => "PoA",
            ProofKind::PoAc => "PoA'",
            ProofKind::PoE2 => "PoE2",
            ProofKind::Or => "OR",
        }
    }

    fn label(self) -> &'static str {
        match self {
            ProofKind::PoB => "pqetl/pob",
            ProofKind::PoC => "pqetl/poc",
            ProofKind::PoE => "pqetl/poe",
            ProofKind::PoKW => "pqetl/pokw",
            ProofKind::PoA => "pqetl/poa",
            ProofKind::PoAc => "pqetl/poa-compact",
            ProofKind::PoE2 => "pqetl/poe2",
            ProofKind::Or => "pqetl/or",
        }
    }
}

impl std::fmt::Display for ProofKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProofError {
    #[error("{kind}: malformed encoding: {source}")]
    Encoding { kind: ProofKind, source: WireError },
    #[error("{kind}: check {check} failed")]
    Check { kind: ProofKind, check: &'static str },
    #[error("{kind}: rejection sampling exceeded {restarts} restarts")]
    Restarts { kind: ProofKind, restarts: usize },
    #[error("{kind}: statement or witness shape: {what}")]
    Shape { kind: ProofKind, what: &'static str },
}

impl ProofError {
    /// The failed verifier check, if this is a check failure.
    pub fn check(&self) -> Option<&'static str> {
        match self {
            ProofError::Check { check, .. } => Some(check),
            _ => None,
        }
    }
}

/// Deliberate prover misbehaviour for negative tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Mask `g` gets a nonzero constant coefficient.
    GConstant,
    /// The prover zeroes the coefficients of `h` the verifier requires to
    /// vanish, as a cheating prover with a bad witness would.
    ZeroHConstant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProveOptions {
    /// Run rejection sampling; disabling it leaks the witness and is for tests.
    pub rejection: bool,
    pub max_restarts: usize,
    pub fault: Option<Fault>,
}

impl Default for ProveOptions {
    fn default() -> Self {
        ProveOptions { rejection: true, max_restarts: 1000, fault: None }
    }
}

impl ProveOptions {
    /// Emits a proof even when the witness fails rejection every time.
    pub fn unchecked() -> Self {
        ProveOptions { rejection: false, ..Default::default() }
    }

    pub fn with_fault(f: Fault) -> Self {
        ProveOptions { fault: Some(f), ..Default::default() }
    }
}

pub(crate) fn fail(kind: ProofKind, check: &'static str) -> ProofError {
    ProofError::Check { kind, check }
}

pub(crate) fn shape(kind: ProofKind, what: &'static str) -> ProofError {
    ProofError::Shape { kind, what }
}

/// Runs `attempt` until it yields a result or the restart cap is reached.
pub(crate) fn with_restarts<T>(
    kind: ProofKind,
    opts: &ProveOptions,
    mut attempt: impl FnMut() -> Result<Option<T>, ProofError>,
) -> Result<T, ProofError> {
    for _ in 0..=opts.max_restarts {
        if let Some(t) = attempt()? {
            return Ok(t);
        }
    }
    Err(ProofError::Restarts { kind, restarts: opts.max_restarts })
}

/// Fresh transcript bound to the proof kind and the caller's context.
pub(crate) fn transcript(kind: ProofKind, ctx: &[u8]) -> Transcript {
    let mut t = Transcript::new(kind.label());
    t.absorb("ctx", ctx);
    t
}

pub(crate) fn absorb_com(t: &mut Transcript, label: &str, ring: &Ring, c: &Commitment) {
    t.absorb(label, &c.encode(ring));
}

pub(crate) fn absorb_pk(t: &mut Transcript, ring: &Ring, pk: &PublicKey) {
    t.absorb("pk", &pk.encode(ring));
}

/// Gaussian mask of `n` ring elements.
pub(crate) fn mask<R: RngCore + ?Sized>(ring: &Ring, rng: &mut R, sigma_sq: u128, n: usize) -> Vec<Poly> {
    GaussianSampler::new(sigma_sq).sample_polys(ring, rng, n).0
}

/// Gaussian integer mask.
pub(crate) fn mask_ints<R: RngCore + ?Sized>(rng: &mut R, sigma_sq: u128, n: usize) -> Vec<i128> {
    GaussianSampler::new(sigma_sq).sample_vec(rng, n).into_iter().map(i128::from).collect()
}

/// Rejection step on polynomial vectors `z = y + v`.
pub(crate) fn rej_polys<R: RngCore + ?Sized>(
    ring: &Ring,
    rng: &mut R,
    opts: &ProveOptions,
    z: &[Poly],
    v: &[Poly],
    sigma_sq: u128,
    m: u32,
) -> bool {
    !opts.rejection || rej(rng, &flatten_centered(ring, z), &flatten_centered(ring, v), sigma_sq, m)
}

pub(crate) fn rej_ints<R: RngCore + ?Sized>(
    rng: &mut R,
    opts: &ProveOptions,
    z: &[i128],
    v: &[i128],
    sigma_sq: u128,
    m: u32,
) -> bool {
    !opts.rejection || rej(rng, z, v, sigma_sq, m)
}

/// `||z||^2 <= 2 dim sigma^2` with `dim` the coefficient count.
pub(crate) fn l2_ok(ring: &Ring, z: &[Poly], sigma_sq: u128) -> bool {
    let dim = (z.len() * ring.d) as u128;
    ring.norm_sq(z) <= 2u128.saturating_mul(dim).saturating_mul(sigma_sq)
}

/// `||z||_inf <= sqrt(2k) sigma` with `k = 128`, squared: `z_i^2 <= 256 sigma^2`.
pub(crate) fn inf_ok(z: &[i128], sigma_sq: u128) -> bool {
    let bound = 256u128.saturating_mul(sigma_sq);
    z.iter().all(|x| {
        let a = x.unsigned_abs();
        a < (1 << 63) && a * a <= bound
    })
}

/// Ternary challenge `c` with `||c||_1 <= omega`.
pub(crate) fn challenge(t: &mut Transcript, ring: &Ring, p: &ParamSet) -> Poly {
    sample_challenge(&mut t.challenge_rng("c"), p.d, p.omega).to_poly(ring)
}

pub(crate) fn challenge_from_seed(seed: [u8; 32], ring: &Ring, p: &ParamSet) -> Poly {
    let mut rng = crate::sampling::rng_from_seed(seed);
    sample_challenge(&mut rng, p.d, p.omega).to_poly(ring)
}

/// Challenge fixed by `sigma_{-1}`.
pub(crate) fn stable_challenge(t: &mut Transcript, ring: &Ring, p: &ParamSet) -> Poly {
    sample_challenge_stable(&mut t.challenge_rng("c"), p.d, p.omega).to_poly(ring)
}

pub(crate) fn proj_challenge(t: &mut Transcript, label: &str, cols: usize) -> ProjMatrix {
    sample_proj_matrix(&mut t.challenge_rng(label), 256, cols)
}

pub(crate) fn scalars(t: &mut Transcript, label: &str, q: u128, n: usize) -> Vec<u128> {
    let mut rng = t.challenge_rng(label);
    (0..n).map(|_| uniform_residue(q, &mut rng)).collect()
}

/// Scalars packed into polynomials, zero-padded to a multiple of `d`.
pub(crate) fn pack_scalars(ring: &Ring, x: &[u128]) -> Vec<Poly> {
    let mut v = x.to_vec();
    v.resize(x.len().div_ceil(ring.d) * ring.d, 0);
    pack_residues(ring, &v)
}

/// `sigma_{-1}(pack(R^T d))`, the polynomial form of `<R^T d, .>`.
pub(crate) fn proj_functional(ring: &Ring, r: &ProjMatrix, d: &[u128]) -> Vec<Poly> {
    pack_residues(ring, &r.tmul_residues(ring, d)).iter().map(|p| ring.sigma_m1(p)).collect()
}

pub(crate) fn sigma_pack(ring: &Ring, d: &[u128]) -> Vec<Poly> {
    pack_scalars(ring, d).iter().map(|p| ring.sigma_m1(p)).collect()
}

/// Ints packed into polynomials (length a multiple of `d`).
pub(crate) fn pack_i(ring: &Ring, x: &[i128]) -> Vec<Poly> {
    crate::ring::vec::pack_ints(ring, x)
}

/// Uniform mask whose first `zeros` coefficients vanish.
pub(crate) fn garbage_mask<R: RngCore + ?Sized>(
    ring: &Ring,
    rng: &mut R,
    zeros: usize,
    fault: Option<Fault>,
) -> Poly {
    let mut g = crate::sampling::uniform_poly(ring, rng);
    for c in g.0.iter_mut().take(zeros) {
        *c = 0;
    }
    if fault == Some(Fault::GConstant) {
        g.0[0] = 1;
    }
    g
}

pub(crate) fn apply_h_fault(h: &mut Poly, zeros: usize, fault: Option<Fault>) {
    if fault == Some(Fault::ZeroHConstant) {
        h.0[..zeros].iter_mut().for_each(|c| *c = 0);
    }
}

/// `r` as centered integers.
pub(crate) fn ints(ring: &Ring, v: &[Poly]) -> Vec<i128> {
    flatten_centered(ring, v)
}

/// Multiplies each element by the challenge.
pub(crate) fn cmul(ring: &Ring, c: &Poly, v: &[Poly]) -> Vec<Poly> {
    crate::ring::vec::vec_scale(ring, c, v)
}

// -------- envelope --------

pub(crate) fn header(kind: ProofKind) -> Vec<u8> {
    vec![kind as u8, VERSION]
}

pub(crate) fn read_header(r: &mut Reader, kind: ProofKind) -> Result<(), WireError> {
    r.expect_u8("proof kind", kind as u8)?;
    r.expect_u8("proof version", VERSION)
}

pub(crate) fn enc_err(kind: ProofKind) -> impl Fn(WireError) -> ProofError {
    move |source| ProofError::Encoding { kind, source }
}

/// Integer vector section (responses of the projection step).
pub(crate) fn put_int_section(out: &mut Vec<u8>, v: &[i128]) {
    let clipped: Vec<i64> =
        v.iter().map(|&x| i64::try_from(x).unwrap_or(if x < 0 { i64::MIN } else { i64::MAX })).collect();
    wire::put_ints(out, &clipped);
}

pub(crate) fn read_int_section(r: &mut Reader, n: usize) -> Result<Vec<i128>, WireError> {
    Ok(r.ints(Some(n))?.into_iter().map(i128::from).collect())
}

pub(crate) fn pp_ring(pp: &PublicParams) -> (&Ring, &ParamSet) {
    (&pp.ring, &pp.params)
}

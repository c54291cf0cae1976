//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs without the libtest harness so every line is printed even when
//! output capture is on. Exits non-zero when a gating criterion fails.
//! Criterion 11 is a timing report and never gates.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use pqetl::commit::{commit_tx, decryption_residuals, extract_value, keygen, PublicKey, PublicParams, SecretKey};
use pqetl::ledger::{CreateOptions, Ledger, LedgerConfig, LedgerError, ProofRole, ValueList};
use pqetl::params::ParamSet;
use pqetl::ring::{mod_pm, Poly, Ring};
use pqetl::sampling::{
    chi_polys, rej, sample_challenge, sample_chi, sample_proj_matrix, uniform_poly, GaussianSampler,
};
use pqetl::zkp::instance::{AnyProof, Instance};
use pqetl::zkp::{eq, poa, poa_compact, pob, poc, poe2};
use pqetl::zkp::{ProofError, ProofKind, ProveOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

struct Desk {
    pp: PublicParams,
    sk: SecretKey,
    pk: PublicKey,
    other_pk: PublicKey,
}

fn desk() -> Desk {
    let pp = PublicParams::expand(&ParamSet::desk(), [7; 32]).expect("desk params expand");
    let mut g = rng(1);
    let (sk, pk) = keygen(&pp, &mut g);
    let (_, other_pk) = keygen(&pp, &mut g);
    Desk { pp, sk, pk, other_pk }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- 1

/// Independent negacyclic schoolbook product with plain `u128` reduction.
fn oracle_mul(q: u128, a: &Poly, b: &Poly) -> Vec<u128> {
    let d = a.0.len();
    let mut out = vec![0u128; d];
    for i in 0..d {
        for j in 0..d {
            let t = a.0[i] * b.0[j] % q;
            let k = i + j;
            if k < d {
                out[k] = (out[k] + t) % q;
            } else {
                out[k - d] = (out[k - d] + q - t) % q;
            }
        }
    }
    out
}

fn c1_ring_oracle(f: &Desk) -> Outcome {
    let ring = &f.pp.ring;
    let q = ring.q();
    ensure(q < 1 << 63, || "desk modulus too wide for the u128 oracle".into())?;
    let t = Instant::now();
    let mut g = rng(101);
    for k in 0..1000 {
        let a = uniform_poly(ring, &mut g);
        let b = uniform_poly(ring, &mut g);
        ensure(ring.mul(&a, &b).0 == oracle_mul(q, &a, &b), || format!("product {k} differs"))?;
    }
    let el = t.elapsed();
    ensure(el < Duration::from_secs(10), || format!("took {el:?}"))?;
    Ok(format!("1000/1000 products equal the schoolbook oracle in {:.2} s", el.as_secs_f64()))
}

// ---------------------------------------------------------------- 2

fn c2_lemmas(f: &Desk) -> Outcome {
    let ring = &f.pp.ring;
    let (q, m) = (ring.q(), ring.d / f.pp.params.l);
    let mut g = rng(102);
    for k in 0..1000 {
        let p = uniform_poly(ring, &mut g);
        ensure(ring.ntt_average(&p) == p.0[..m], || format!("NTT average identity fails on input {k}"))?;
    }
    for k in 0..1000 {
        let n = 1 + k % 4;
        let x: Vec<Poly> = (0..n).map(|_| uniform_poly(ring, &mut g)).collect();
        let y: Vec<Poly> = (0..n).map(|_| uniform_poly(ring, &mut g)).collect();
        let mut f_poly = ring.zero();
        for (a, b) in x.iter().zip(&y) {
            ring.add_assign(&mut f_poly, &ring.mul(&ring.sigma_m1(a), b));
        }
        let inner = x.iter().zip(&y).flat_map(|(a, b)| a.0.iter().zip(&b.0)).fold(0u128, |acc, (&u, &v)| (acc + u * v % q) % q);
        ensure(f_poly.0[0] == inner, || format!("constant coefficient identity fails on input {k}"))?;
    }
    Ok("NTT average and constant-coefficient identities hold on 1000 inputs each".into())
}

// ---------------------------------------------------------------- 3

fn c3_distributions(f: &Desk) -> Outcome {
    let p = &f.pp.params;
    let ring = &f.pp.ring;
    let mut g = rng(103);
    let draws = sample_chi(&mut g, 1_000_000);
    let freq = |x: i64| draws.iter().filter(|&&c| c == x).count() as f64 / draws.len() as f64;
    let chi = [freq(-1), freq(0), freq(1)];
    for (got, want) in chi.iter().zip([5.0 / 16.0, 6.0 / 16.0, 5.0 / 16.0]) {
        ensure((got - want).abs() <= 0.005, || format!("chi frequencies {chi:?}"))?;
    }

    let mut zeros = vec![0usize; p.d];
    for _ in 0..100_000 {
        let c = sample_challenge(&mut g, p.d, p.omega);
        for (z, &x) in zeros.iter_mut().zip(&c.coeffs) {
            *z += (x == 0) as usize;
        }
    }
    let worst = zeros.iter().map(|&z| (z as f64 / 1e5 - 0.5).abs()).fold(0.0, f64::max);
    ensure(worst <= 0.01, || format!("challenge P(0) deviates by {worst:.4}"))?;

    let s2 = p.sigma_sq.poe2.sq[0];
    let gauss = GaussianSampler::new(s2);
    let n = p.n_rand();
    let accepted: usize = (0..10_000u64)
        .into_par_iter()
        .map(|k| {
            let mut g = rng(10_000 + k);
            let c = sample_challenge(&mut g, p.d, p.omega);
            let r = chi_polys(ring, &mut g, n);
            let v: Vec<i128> = r.iter().flat_map(|ri| ring.centered(&ring.mul_small(&c.coeffs, ri))).collect();
            let z: Vec<i128> = v.iter().map(|&vi| vi + gauss.sample(&mut g) as i128).collect();
            rej(&mut g, &z, &v, s2, p.rej_m) as usize
        })
        .sum();
    let rate = accepted as f64 / 1e4;
    ensure((0.28..=0.39).contains(&rate), || format!("acceptance rate {rate:.4}"))?;
    Ok(format!(
        "chi ({:.4}, {:.4}, {:.4}); challenge max |P(0)-1/2| = {worst:.4}; rejection acceptance {rate:.4}",
        chi[0], chi[1], chi[2]
    ))
}

// ---------------------------------------------------------------- 4

fn c4_projection() -> Outcome {
    let (rows, cols) = (256, 448);
    let mut g = rng(104);
    let w: Vec<i128> = (0..cols).map(|_| g.random_range(-5000..=5000)).collect();
    let w2: i128 = w.iter().map(|x| x * x).sum();
    let winf = w.iter().map(|x| x.abs()).max().unwrap_or(0);
    let (mut inf_bad, mut l2_bad) = (0, 0);
    let (mut lo, mut hi) = (f64::MAX, 0f64);
    for _ in 0..1000 {
        let r = sample_proj_matrix(&mut g, rows, cols);
        let rw: Vec<i128> =
            (0..rows).map(|i| (0..cols).map(|j| r.entry(i, j) as i128 * w[j]).sum()).collect();
        ensure(rw == r.mul(&w), || "projection product differs from the entry-wise oracle".into())?;
        let inf = rw.iter().map(|x| x.abs()).max().unwrap_or(0);
        inf_bad += (2 * inf < winf) as usize;
        let n2: i128 = rw.iter().map(|x| x * x).sum();
        l2_bad += !(30 * w2 <= n2 && n2 <= 337 * w2) as usize;
        let ratio = n2 as f64 / w2 as f64;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    ensure(inf_bad == 0 && l2_bad == 0, || format!("{inf_bad} infinity-norm and {l2_bad} l2 violations"))?;
    Ok(format!("0 violations in 1000 trials; ||Rw||^2/||w||^2 in [{lo:.1}, {hi:.1}]"))
}

// ---------------------------------------------------------------- 5

fn c5_completeness(f: &Desk) -> Outcome {
    let t = Instant::now();
    let mut line = Vec::new();
    for kind in ProofKind::ALL {
        let ok: usize = (0..100u64)
            .into_par_iter()
            .map(|k| {
                let mut g = rng(50_000 + 1000 * kind as u64 + k);
                let inst = Instance::honest(&f.pp, kind, &f.sk, &f.pk, &mut g);
                inst.prove(&f.pp, &mut g, &ProveOptions::default()).and_then(|pf| inst.verify(&f.pp, &pf)).is_ok() as usize
            })
            .sum();
        ensure(ok == 100, || format!("{kind}: {ok}/100"))?;
        line.push(format!("{kind} 100/100"));
    }
    let el = t.elapsed();
    ensure(el < Duration::from_secs(15 * 60), || format!("took {el:?}"))?;
    Ok(format!("{} in {:.1} s", line.join(", "), el.as_secs_f64()))
}

// ---------------------------------------------------------------- 6

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Expect {
    Check(ProofKind, &'static str),
}

type TamperFn = Box<dyn Fn(&Desk, &Instance, &AnyProof) -> Result<(), ProofError> + Sync>;

struct Tamper {
    name: &'static str,
    expect: Expect,
    run: TamperFn,
}

fn tamper(
    name: &'static str,
    expect: Expect,
    run: impl Fn(&Desk, &Instance, &AnyProof) -> Result<(), ProofError> + Sync + 'static,
) -> Tamper {
    Tamper { name, expect, run: Box::new(run) }
}

/// Recommits `com` (and PoB's first column entry) to a different value.
fn wrong_value(f: &Desk, inst: &Instance) -> Instance {
    let ring = &f.pp.ring;
    let mut i = inst.clone();
    let msg = if inst.kind == ProofKind::PoAc {
        let mut m = Poly(inst.values.iter().map(|&x| x as u128).collect());
        m.0[0] = ring.md.add(m.0[0], 1);
        m
    } else {
        ring.constant(inst.value as u128 + 1)
    };
    i.com = commit_tx(&f.pp, &inst.pk, &msg, &inst.r).expect("dimensions");
    i.column[0] = i.com.clone();
    i
}

fn bump(ring: &Ring, p: &mut Poly, k: usize, by: u128) {
    p.0[k] = ring.md.add(p.0[k], by);
}

/// Adds `(q-1)/2` to the first coefficient of the first response.
fn inflate(f: &Desk, pf: &AnyProof) -> AnyProof {
    let ring = &f.pp.ring;
    let big = (ring.q() - 1) / 2;
    let mut pf = pf.clone();
    match &mut pf {
        AnyProof::PoB(p) => bump(ring, &mut p.z[0], 0, big),
        AnyProof::PoC(p) => bump(ring, &mut p.z1[0], 0, big),
        AnyProof::PoE(p) | AnyProof::PoKW(p) => bump(ring, &mut p.z1[0], 0, big),
        AnyProof::PoA(p) => bump(ring, &mut p.z[0], 0, big),
        AnyProof::PoAc(p) => bump(ring, &mut p.z1[0], 0, big),
        AnyProof::PoE2(p) => bump(ring, &mut p.z[0], 0, big),
        AnyProof::Or(p) => bump(ring, &mut p.eq_z1[0], 0, big),
    }
    pf
}

/// Adds 1 to the last coefficient of the last response.
fn nudge(f: &Desk, pf: &AnyProof) -> AnyProof {
    let ring = &f.pp.ring;
    let last = |v: &mut Vec<Poly>| {
        let p = v.last_mut().expect("nonempty response");
        let k = p.0.len() - 1;
        bump(ring, p, k, 1);
    };
    let mut pf = pf.clone();
    match &mut pf {
        AnyProof::PoB(p) => last(&mut p.z),
        AnyProof::PoC(p) => last(&mut p.z2),
        AnyProof::PoE(p) | AnyProof::PoKW(p) => last(&mut p.z2),
        AnyProof::PoA(p) => last(&mut p.z),
        AnyProof::PoAc(p) => last(&mut p.z3),
        AnyProof::PoE2(p) => last(&mut p.z2),
        AnyProof::Or(p) => last(&mut p.e2_z2),
    }
    pf
}

/// Flips the single byte in which `nudge` changes the encoding.
fn flip_byte(f: &Desk, inst: &Instance, pf: &AnyProof) -> Result<(), ProofError> {
    let a = pf.encode(&f.pp);
    let b = nudge(f, pf).encode(&f.pp);
    let diff: Vec<usize> = (0..a.len()).filter(|&i| a[i] != b[i]).collect();
    assert_eq!(diff.len(), 1, "nudge must change exactly one byte");
    let mut bytes = a;
    bytes[diff[0]] ^= 0x01;
    inst.verify_bytes(&f.pp, &bytes)
}

fn with_stmt(f: &Desk, inst: &Instance, pf: &AnyProof, edit: impl Fn(&Desk, &mut Instance)) -> Result<(), ProofError> {
    let mut i = inst.clone();
    edit(f, &mut i);
    i.verify(&f.pp, pf)
}

fn sqrt_slot(f: &Desk, i: &mut Instance) {
    let ring = &f.pp.ring;
    bump(ring, &mut i.com.c2, 0, 1);
}

fn other_key(f: &Desk, i: &mut Instance) {
    i.pk = f.other_pk.clone();
}

fn other_ctx(_: &Desk, i: &mut Instance) {
    i.ctx = b"pqetl/another-context".to_vec();
}

fn tampers(kind: ProofKind) -> Vec<Tamper> {
    use Expect::Check;
    use ProofKind as K;
    let value = |e| tamper("wrong value", e, |f, i, p| wrong_value(f, i).verify(&f.pp, p));
    let key = |e| tamper("wrong key", e, |f, i, p| with_stmt(f, i, p, other_key));
    let norm = |e| tamper("inflated norm", e, |f, i, p| i.verify(&f.pp, &inflate(f, p)));
    let byte = |e| tamper("flipped byte", e, flip_byte);
    let slot = |e| tamper("inconsistent sqrt(q) slot", e, |f, i, p| with_stmt(f, i, p, sqrt_slot));
    let ctx = |e| tamper("wrong context", e, |f, i, p| with_stmt(f, i, p, other_ctx));
    match kind {
        K::PoB => vec![
            value(Check(K::PoB, pob::CHECK_AJTAI)),
            norm(Check(K::PoB, pob::CHECK_NORM)),
            byte(Check(K::PoB, pob::CHECK_AJTAI)),
            ctx(Check(K::PoB, pob::CHECK_AJTAI)),
            tamper("unbalanced column", Check(K::PoB, pob::CHECK_BALANCE), |f, i, _| {
                let j = wrong_value(f, i);
                let rs = pqetl::ring::vec::vec_add(&f.pp.ring, &j.r, &j.r2);
                let pf = pob::prove_pob(&f.pp, &j.ctx, &j.column, &rs, &mut rng(61), &ProveOptions::default())?;
                j.verify(&f.pp, &AnyProof::PoB(pf))
            }),
        ],
        K::PoC => vec![
            value(Check(K::PoC, poc::CHECK_OPEN)),
            key(Check(K::PoC, poc::CHECK_OPEN)),
            norm(Check(K::PoC, poc::CHECK_Z1)),
            byte(Check(K::PoC, poc::CHECK_OPEN)),
            slot(Check(K::PoC, poc::CHECK_OPEN)),
        ],
        K::PoE => vec![
            value(Check(K::PoE, eq::CHECK_OPEN)),
            key(Check(K::PoE, eq::CHECK_OPEN)),
            norm(Check(K::PoE, eq::CHECK_Z1)),
            byte(Check(K::PoE, eq::CHECK_OPEN)),
            slot(Check(K::PoE, eq::CHECK_OPEN)),
        ],
        K::PoKW => vec![
            key(Check(K::PoKW, eq::CHECK_OPEN)),
            norm(Check(K::PoKW, eq::CHECK_Z1)),
            byte(Check(K::PoKW, eq::CHECK_OPEN)),
            ctx(Check(K::PoKW, eq::CHECK_OPEN)),
            tamper("foreign secret key", Check(K::PoKW, eq::CHECK_LINEAR), |f, i, _| {
                let (sk2, _) = keygen(&f.pp, &mut rng(62));
                let st = eq::PokwStatement { pk: &i.pk };
                let pf = eq::prove_pokw(&f.pp, &i.ctx, &st, &sk2, &mut rng(63), &ProveOptions::unchecked())?;
                i.verify(&f.pp, &AnyProof::PoKW(pf))
            }),
        ],
        K::PoA => vec![
            value(Check(K::PoA, poa::CHECK_OPEN)),
            norm(Check(K::PoA, poa::CHECK_NORM)),
            byte(Check(K::PoA, poa::CHECK_OPEN)),
            ctx(Check(K::PoA, poa::CHECK_OPEN)),
            tamper("value above range", Check(K::PoA, poa::CHECK_H), |f, i, _| {
                let v = 1i128 << f.pp.params.value_bits;
                let mut j = i.clone();
                j.com = commit_tx(&f.pp, &i.pk, &f.pp.ring.constant(v as u128), &i.r).expect("dimensions");
                let st = poa::PoaStatement { pk: &j.pk, com: &j.com };
                let pf = poa::prove_poa(&f.pp, &j.ctx, &st, &j.r, v, &mut rng(64), &ProveOptions::default())?;
                j.verify(&f.pp, &AnyProof::PoA(pf))
            }),
        ],
        K::PoAc => vec![
            value(Check(K::PoAc, poa_compact::CHECK_OPEN)),
            norm(Check(K::PoAc, poa_compact::CHECK_NORM)),
            byte(Check(K::PoAc, poa_compact::CHECK_OPEN)),
            ctx(Check(K::PoAc, poa_compact::CHECK_OPEN)),
            tamper("negative coefficient", Check(K::PoAc, poa_compact::CHECK_H), |f, i, _| {
                let mut j = i.clone();
                j.values[1] = -1;
                let ring = &f.pp.ring;
                let m = Poly(j.values.iter().map(|&x| ring.md.from_i128(x)).collect());
                j.com = commit_tx(&f.pp, &i.pk, &m, &i.r).expect("dimensions");
                let st = poa_compact::PoaCompactStatement { pk: &j.pk, com: &j.com };
                let pf = poa_compact::prove_poa_compact(&f.pp, &j.ctx, &st, &j.r, &j.values, &mut rng(65), &ProveOptions::default())?;
                j.verify(&f.pp, &AnyProof::PoAc(pf))
            }),
        ],
        // statement edits move the challenge, so the first challenge-bound check fails
        K::PoE2 => vec![
            value(Check(K::PoE2, poe2::CHECK_AJTAI)),
            key(Check(K::PoE2, poe2::CHECK_AJTAI)),
            norm(Check(K::PoE2, poe2::CHECK_NORM)),
            byte(Check(K::PoE2, poe2::CHECK_AJTAI2)),
            slot(Check(K::PoE2, poe2::CHECK_AJTAI)),
            tamper("differing messages", Check(K::PoE2, poe2::CHECK_CROSS), |f, i, _| {
                let j = wrong_value(f, i);
                let st = poe2::Poe2Statement { pk: &j.pk, com: &j.com, com2: &j.com2 };
                let pf = poe2::prove_poe2(&f.pp, &j.ctx, &st, &j.r, &j.r2, &mut rng(66), &ProveOptions::default())?;
                j.verify(&f.pp, &AnyProof::PoE2(pf))
            }),
        ],
        // the PoE branch challenge is the transmitted seed, so statement edits
        // surface in the linear system that binds the commitments
        K::Or => vec![
            value(Check(K::PoE, eq::CHECK_LINEAR)),
            key(Check(K::PoE, eq::CHECK_LINEAR)),
            norm(Check(K::PoE, eq::CHECK_Z1)),
            byte(Check(K::PoE2, poe2::CHECK_AJTAI2)),
            slot(Check(K::PoE, eq::CHECK_LINEAR)),
        ],
    }
}

fn c6_soundness(f: &Desk) -> Outcome {
    let mut total = 0;
    let mut errors = Vec::new();
    for kind in ProofKind::ALL {
        let mut g = rng(60_000 + kind as u64);
        let inst = Instance::honest(&f.pp, kind, &f.sk, &f.pk, &mut g);
        let pf = inst.prove(&f.pp, &mut g, &ProveOptions::default()).map_err(|e| e.to_string())?;
        inst.verify(&f.pp, &pf).map_err(|e| format!("{kind}: honest proof rejected: {e}"))?;
        let ts = tampers(kind);
        ensure(ts.len() >= 5, || format!("{kind}: only {} tamperings", ts.len()))?;
        for t in &ts {
            total += 1;
            let Expect::Check(ek, ec) = t.expect;
            match (t.run)(f, &inst, &pf) {
                Err(ProofError::Check { kind: k, check }) if k == ek && check == ec => {}
                other => errors.push(format!("{kind} {}: expected {ek} {ec}, got {other:?}", t.name)),
            }
        }
    }
    ensure(errors.is_empty(), || errors.join("; "))?;
    Ok(format!("{total} tamperings over {} kinds rejected at the expected check", ProofKind::ALL.len()))
}

// ---------------------------------------------------------------- 7

fn c7_extraction(f: &Desk) -> Outcome {
    let (pp, ring) = (&f.pp, &f.pp.ring);
    let vb = pp.params.value_bits;
    let quarter = pp.sqrt_q / 4;
    let bad: Vec<String> = (0..1000u64)
        .into_par_iter()
        .filter_map(|k| {
            let mut g = rng(70_000 + k);
            let v: i128 = g.random_range(-(1i128 << vb) + 1..1i128 << vb);
            let r = chi_polys(ring, &mut g, pp.params.n_rand());
            let com = commit_tx(pp, &f.pk, &ring.constant(ring.md.from_i128(v)), &r).expect("dimensions");
            match extract_value(pp, &f.sk, &com) {
                Ok(x) if x == v => {}
                other => return Some(format!("extract({v}) = {other:?}")),
            }
            let mut v2 = v;
            while v2 == v {
                v2 = g.random_range(-(1i128 << vb) + 1..1i128 << vb);
            }
            let (r1, r2) = decryption_residuals(pp, &f.sk, &com, &ring.constant(ring.md.from_i128(v2)));
            (r1.max(r2) < quarter).then(|| format!("residual below sqrt(q)/4 for {v} vs {v2}"))
        })
        .collect();
    ensure(bad.is_empty(), || bad.join("; "))?;
    Ok("1000/1000 values extracted exactly; 1000/1000 mismatched decryptions exceed sqrt(q)/4".into())
}

// ---------------------------------------------------------------- 8

fn c8_shifted_range() -> Outcome {
    let mut checked = 0u64;
    for q in [257u128, 7681, 12289] {
        let half = (q - 1) / 2;
        let fails = (0..=half as i128)
            .into_par_iter()
            .filter(|b| b % 2 == 0)
            .map(|b| {
                let s = b / 2;
                (0..q as i128)
                    .filter(|&r| {
                        let rc = mod_pm(r, q);
                        let shifted_small = mod_pm(r - s, q).abs() <= s;
                        let in_range = (0..=b).contains(&rc);
                        shifted_small != in_range
                    })
                    .count()
            })
            .sum::<usize>();
        ensure(fails == 0, || format!("q = {q}: {fails} counterexamples"))?;
        checked += (half / 2 + 1) as u64 * q as u64;
    }
    Ok(format!("{checked} (q, B, r) triples, 0 counterexamples"))
}

// ---------------------------------------------------------------- 9

fn c9_ledger() -> Outcome {
    let t = Instant::now();
    let (n, a) = (4, 2);
    let genesis = ValueList(vec![vec![10, 0, 0, 0], vec![5, 0, 0, 0]]);
    let (mut l, sks) = Ledger::setup(&ParamSet::desk(), LedgerConfig { assets: a, compact: false }, &genesis, [9; 32])
        .map_err(|e| e.to_string())?;
    let mut plain = genesis.0.clone();
    let totals: Vec<i128> = plain.iter().map(|r| r.iter().sum()).collect();
    let mut g = rng(90);
    // (asset, from, to, amount) legs; an empty list is an all-decoy row
    let script: Vec<Vec<(usize, usize, usize, i128)>> = vec![
        vec![(0, 0, 1, 3)],
        vec![(1, 0, 2, 2)],
        vec![],
        vec![(0, 1, 3, 1), (1, 2, 3, 1)],
        vec![(0, 0, 2, 4)],
        vec![(0, 2, 1, 2), (0, 3, 0, 1)],
        vec![(1, 0, 1, 3)],
        vec![],
        vec![(0, 1, 0, 4), (1, 1, 0, 1)],
        vec![(1, 3, 2, 1)],
        vec![(0, 0, 3, 5)],
        vec![(0, 3, 2, 3), (1, 2, 1, 2)],
        vec![(1, 1, 3, 4)],
        vec![(0, 2, 0, 5)],
        vec![],
        vec![(0, 0, 1, 7), (1, 0, 3, 1)],
        vec![(0, 1, 2, 2), (1, 3, 0, 5)],
        vec![(1, 0, 2, 5)],
        vec![(0, 3, 1, 2)],
        vec![(0, 1, 0, 1), (0, 2, 0, 1), (1, 2, 0, 1)],
    ];
    ensure(script.len() == 20, || "script must hold 20 transactions".into())?;
    let check_state = |l: &Ledger, plain: &[Vec<i128>], step: usize| -> Result<(), String> {
        for (asset, row) in plain.iter().enumerate() {
            let mut sum = 0;
            for (i, sk) in sks.iter().enumerate() {
                let b = l.check_balance(sk, i, asset).map_err(|e| e.to_string())?;
                ensure(b == row[i], || format!("step {step}: balance({i}, {asset}) = {b}, script says {}", row[i]))?;
                sum += b;
            }
            ensure(sum == totals[asset], || format!("step {step}: asset {asset} total {sum}"))?;
        }
        Ok(())
    };
    check_state(&l, &plain, 0)?;
    let (mut overspends, mut unbalanced) = (0, 0);
    for (step, legs) in script.iter().enumerate() {
        let mut v = ValueList::zeros(a, n);
        for &(asset, from, to, amt) in legs {
            v.0[asset][from] -= amt;
            v.0[asset][to] += amt;
        }
        let spenders: Vec<bool> = (0..n).map(|i| (0..a).any(|x| v.0[x][i] < 0)).collect();
        let keys: Vec<Option<&SecretKey>> = (0..n).map(|i| spenders[i].then(|| &sks[i])).collect();
        let (tx, _) = l.create_tx(&v, &keys, &mut g, &CreateOptions::default()).map_err(|e| format!("step {step}: {e}"))?;
        l.verify_tx(&tx).map_err(|e| format!("step {step}: {e}"))?;
        l.append(tx).map_err(|e| format!("step {step}: {e}"))?;
        for (asset, row) in v.0.iter().enumerate() {
            for (i, x) in row.iter().enumerate() {
                plain[asset][i] += x;
            }
        }
        check_state(&l, &plain, step + 1)?;

        if step % 5 == 4 {
            // overspend: the richest holder of asset 0 sends one more than it has
            let from = (0..n).max_by_key(|&i| plain[0][i]).expect("participants");
            let to = (from + 1) % n;
            let bad = ValueList::transfer(a, n, 0, from, to, plain[0][from] + 1);
            let all: Vec<Option<&SecretKey>> = sks.iter().map(Some).collect();
            let refused = l.create_tx(&bad, &all, &mut g, &CreateOptions::default());
            ensure(matches!(refused, Err(LedgerError::Overspend { .. })), || format!("step {step}: overspend not refused"))?;
            let forced = CreateOptions { force: true, ..Default::default() };
            let (tx, _) = l.create_tx(&bad, &all, &mut g, &forced).map_err(|e| e.to_string())?;
            let e = l.verify_tx(&tx).expect_err("overspend verified");
            ensure(e.proof.role == ProofRole::PoA, || format!("step {step}: overspend failed {e}"))?;
            ensure(l.append(tx).is_err(), || "overspend appended".into())?;
            overspends += 1;

            let mut skew = ValueList::transfer(a, n, 1, from, to, 1);
            skew.0[1][to] += 1;
            let (tx, _) = l.create_tx(&skew, &all, &mut g, &forced).map_err(|e| e.to_string())?;
            let e = l.verify_tx(&tx).expect_err("unbalanced row verified");
            ensure(e.proof.role == ProofRole::PoB, || format!("step {step}: unbalanced failed {e}"))?;
            ensure(l.append(tx).is_err(), || "unbalanced row appended".into())?;
            unbalanced += 1;
            ensure(l.len() == step + 1, || "rejected row changed the ledger".into())?;
        }
    }
    l.verify_all().map_err(|(k, e)| format!("re-verify of transaction {k}: {e}"))?;
    let el = t.elapsed();
    ensure(el < Duration::from_secs(600), || format!("took {el:?}"))?;
    Ok(format!(
        "20/20 transactions verified; balances match after every step; {overspends} overspends and {unbalanced} unbalanced rows rejected; {:.1} s",
        el.as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 10

fn c10_serialization(f: &Desk) -> Outcome {
    let mut sizes = Vec::new();
    for kind in ProofKind::ALL {
        let mut g = rng(100_000 + kind as u64);
        let inst = Instance::honest(&f.pp, kind, &f.sk, &f.pk, &mut g);
        let pf = inst.prove(&f.pp, &mut g, &ProveOptions::default()).map_err(|e| e.to_string())?;
        let bytes = pf.encode(&f.pp);
        let back = AnyProof::decode(&f.pp, kind, &bytes).map_err(|e| format!("{kind}: {e}"))?;
        ensure(back == pf, || format!("{kind}: decode(encode(p)) != p"))?;
        inst.verify(&f.pp, &back).map_err(|e| format!("{kind}: {e}"))?;
        let accepted: Vec<(usize, u8)> = (0..1000u64)
            .into_par_iter()
            .filter_map(|k| {
                let mut g = rng(110_000 + 1000 * kind as u64 + k);
                let pos = g.random_range(0..bytes.len());
                let mask = g.random_range(1..=255u8);
                let mut b = bytes.clone();
                b[pos] ^= mask;
                inst.verify_bytes(&f.pp, &b).is_ok().then_some((pos, mask))
            })
            .collect();
        ensure(accepted.is_empty(), || format!("{kind}: flips accepted at {accepted:?}"))?;
        sizes.push(format!("{kind} {} B", bytes.len()));
    }
    Ok(format!("round trips verify; 8000/8000 byte flips rejected ({})", sizes.join(", ")))
}

// ---------------------------------------------------------------- 11

fn c11_paper_bench() -> Outcome {
    let rows = pqetl::cli::bench(&ParamSet::paper(), &[ProofKind::PoC], 1, [11; 32]).map_err(|e| e.message)?;
    let ms = rows[0].prove_ms;
    let line = format!("PoC prove at paper parameters: {ms:.0} ms (reference 161 ms, limit 16112 ms)");
    if ms <= 161.12 * 100.0 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn main() {
    let start = Instant::now();
    let f = desk();
    type Criterion<'a> = (&'static str, bool, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("ring oracle equivalence", true, Box::new(|| c1_ring_oracle(&f))),
        ("lemma identities", true, Box::new(|| c2_lemmas(&f))),
        ("distribution statistics", true, Box::new(|| c3_distributions(&f))),
        ("projection lemmas", true, Box::new(c4_projection)),
        ("completeness", true, Box::new(|| c5_completeness(&f))),
        ("soundness spot checks", true, Box::new(|| c6_soundness(&f))),
        ("extraction", true, Box::new(|| c7_extraction(&f))),
        ("shifted range lemma", true, Box::new(c8_shifted_range)),
        ("ledger scenario", true, Box::new(c9_ledger)),
        ("serialization", true, Box::new(|| c10_serialization(&f))),
        ("paper-parameter timing (report only)", false, Box::new(c11_paper_bench)),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (k, (name, gating, run)) in criteria.iter().enumerate() {
        let n = k + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let t = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("criterion {n:>2} PASS {name}: {msg} [{secs:.1} s]"),
            Err(msg) if *gating => {
                failed += 1;
                println!("criterion {n:>2} FAIL {name}: {msg} [{secs:.1} s]");
            }
            Err(msg) => println!("criterion {n:>2} FAIL (non-gating) {name}: {msg} [{secs:.1} s]"),
        }
    }
    println!("acceptance: {failed} gating failures in {:.1} s", start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}

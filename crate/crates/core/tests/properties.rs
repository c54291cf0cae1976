//! Invariants: ring algebra, commitments, transcripts, extractor, simulators,
//! samplers and ledger determinism.

use std::sync::OnceLock;

use pqetl::commit::{
    check_weak_opening_bdlop, commit_tx, extract_value, keygen, sum_commitments, PublicKey, PublicParams, SecretKey,
};
use pqetl::ledger::{CreateOptions, Ledger, LedgerConfig, Transaction, ValueList};
use pqetl::params::ParamSet;
use pqetl::ring::vec::{flatten_centered, vec_add, vec_sub};
use pqetl::ring::{Poly, Ring};
use pqetl::sampling::{chi_polys, rej, sample_challenge, uniform_poly, GaussianSampler};
use pqetl::transcript::Transcript;
use pqetl::zkp::pob::{pob_check, pob_first, prove_pob, simulate_pob};
use pqetl::zkp::poe2::{prove_poe2, simulate_poe2, Poe2Statement};
use pqetl::zkp::ProveOptions;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

struct Fx {
    pp: PublicParams,
    sk: SecretKey,
    pk: PublicKey,
}

fn fx() -> &'static Fx {
    static FX: OnceLock<Fx> = OnceLock::new();
    FX.get_or_init(|| {
        let pp = PublicParams::expand(&ParamSet::desk(), [5; 32]).unwrap();
        let (sk, pk) = keygen(&pp, &mut rng(2));
        Fx { pp, sk, pk }
    })
}

fn paper_ring() -> &'static Ring {
    static R: OnceLock<Ring> = OnceLock::new();
    R.get_or_init(|| ParamSet::paper().ring().unwrap())
}

fn small_poly(ring: &Ring, g: &mut ChaCha20Rng, bound: i64) -> Poly {
    ring.from_i64s(&(0..ring.d).map(|_| g.random_range(-bound..=bound)).collect::<Vec<_>>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ntt_roundtrips_on_both_parameter_sets(seed in any::<u64>()) {
        let mut g = rng(seed);
        for ring in [&fx().pp.ring, paper_ring()] {
            let p = uniform_poly(ring, &mut g);
            prop_assert_eq!(ring.intt(&ring.ntt(&p)), p);
        }
    }

    #[test]
    fn ntt_product_matches_schoolbook(seed in any::<u64>()) {
        let mut g = rng(seed);
        for ring in [&fx().pp.ring, paper_ring()] {
            let (a, b) = (uniform_poly(ring, &mut g), uniform_poly(ring, &mut g));
            prop_assert_eq!(ring.mul(&a, &b), ring.mul_schoolbook(&a, &b));
        }
    }

    #[test]
    fn automorphisms_are_ring_homomorphisms(seed in any::<u64>(), half in 0i64..64) {
        let ring = &fx().pp.ring;
        let mut g = rng(seed);
        let i = 2 * half + 1;
        let (a, b) = (uniform_poly(ring, &mut g), uniform_poly(ring, &mut g));
        let s = |p: &Poly| ring.automorphism(p, i).unwrap();
        prop_assert_eq!(s(&ring.mul(&a, &b)), ring.mul(&s(&a), &s(&b)));
        prop_assert_eq!(s(&ring.add(&a, &b)), ring.add(&s(&a), &s(&b)));
        prop_assert_eq!(ring.automorphism(&a, -1).unwrap(), ring.sigma_m1(&a));
    }

    #[test]
    fn norm_inequalities(seed in any::<u64>(), bound in 1i64..1000) {
        let ring = &fx().pp.ring;
        let p = &fx().pp.params;
        let mut g = rng(seed);
        let (a, b) = (small_poly(ring, &mut g, bound), small_poly(ring, &mut g, bound));
        let (na, nb, ns) = (ring.norms(&a), ring.norms(&b), ring.norms(&ring.add(&a, &b)));
        prop_assert!(ns.inf <= na.inf + nb.inf);
        prop_assert!(ns.l2() <= na.l2() + nb.l2() + 1e-9);
        let c = sample_challenge(&mut g, p.d, p.omega);
        let ca = ring.norms(&ring.mul(&c.to_poly(ring), &a));
        prop_assert!(ca.inf <= c.l1() as u128 * na.inf);
    }

    #[test]
    fn commitments_are_homomorphic_and_extract(v1 in 0i128..1 << 20, v2 in -(1i128 << 20)..1 << 20, seed in any::<u64>()) {
        let f = fx();
        let ring = &f.pp.ring;
        let mut g = rng(seed);
        let n = f.pp.params.n_rand();
        let (r1, r2) = (chi_polys(ring, &mut g, n), chi_polys(ring, &mut g, n));
        let k = |v: i128| ring.constant(ring.md.from_i128(v));
        let c1 = commit_tx(&f.pp, &f.pk, &k(v1), &r1).unwrap();
        let c2 = commit_tx(&f.pp, &f.pk, &k(v2), &r2).unwrap();
        prop_assert_eq!(extract_value(&f.pp, &f.sk, &c1).unwrap(), v1);
        let sum = sum_commitments(&f.pp, [&c1, &c2]);
        prop_assert_eq!(&sum, &commit_tx(&f.pp, &f.pk, &k(v1 + v2), &vec_add(ring, &r1, &r2)).unwrap());
        prop_assert_eq!(extract_value(&f.pp, &f.sk, &sum).unwrap(), v1 + v2);
    }

    #[test]
    fn transcript_avalanche(msgs in prop::collection::vec(prop::collection::vec(any::<u8>(), 1..64), 2..6), pick in any::<prop::sample::Index>(), bit in 0u8..8) {
        let run = |m: &[Vec<u8>]| -> Vec<[u8; 32]> {
            let mut t = Transcript::new("avalanche");
            m.iter().map(|x| { t.absorb("msg", x); t.challenge_seed("c") }).collect()
        };
        let k = pick.index(msgs.len());
        let mut alt = msgs.clone();
        let j = alt[k].len() / 2;
        alt[k][j] ^= 1 << bit;
        let (a, b) = (run(&msgs), run(&alt));
        for i in 0..msgs.len() {
            if i < k {
                prop_assert_eq!(a[i], b[i]);
            } else {
                prop_assert_ne!(a[i], b[i]);
            }
        }
    }
}

#[test]
fn challenge_differences_are_invertible() {
    let ring = &fx().pp.ring;
    let p = &fx().pp.params;
    let mut g = rng(3);
    for _ in 0..10_000 {
        let c = sample_challenge(&mut g, p.d, p.omega).to_poly(ring);
        let c2 = sample_challenge(&mut g, p.d, p.omega).to_poly(ring);
        if c != c2 {
            assert!(ring.is_invertible(&ring.sub(&c, &c2)));
        }
    }
}

/// Two accepting balance transcripts with a shared first move and distinct
/// challenges yield `r* = (z - z') / (c - c')` and `v* = 0`.
#[test]
fn balance_proof_special_soundness() {
    let f = fx();
    let (pp, ring, p) = (&f.pp, &f.pp.ring, &f.pp.params);
    let mut g = rng(4);
    for trial in 0..20 {
        let v = g.random_range(0..1i128 << 20);
        let (r, r2) = (chi_polys(ring, &mut g, p.n_rand()), chi_polys(ring, &mut g, p.n_rand()));
        let coms = [
            commit_tx(pp, &f.pk, &ring.constant(v as u128), &r).unwrap(),
            commit_tx(pp, &f.pk, &ring.neg(&ring.constant(v as u128)), &r2).unwrap(),
        ];
        let rs = vec_add(ring, &r, &r2);
        let first = pob_first(pp, &mut g, coms.len());
        let c = sample_challenge(&mut g, p.d, p.omega).to_poly(ring);
        let mut c2 = c.clone();
        while c2 == c {
            c2 = sample_challenge(&mut g, p.d, p.omega).to_poly(ring);
        }
        let respond = |c: &Poly| vec_add(ring, &first.y, &rs.iter().map(|x| ring.mul(c, x)).collect::<Vec<_>>());
        let (z, z2) = (respond(&c), respond(&c2));
        pob_check(pp, &coms, &first.w, &first.u, &c, &z).unwrap();
        pob_check(pp, &coms, &first.w, &first.u, &c2, &z2).unwrap();

        let cbar = ring.sub(&c, &c2);
        let inv = ring.inverse(&cbar).unwrap();
        let r_star: Vec<Poly> = vec_sub(ring, &z, &z2).iter().map(|x| ring.mul(&inv, x)).collect();
        let s = sum_commitments(pp, &coms);
        let v_star = ring.sub(&s.c3, &pp.b.mul_vec(ring, &r_star)[0]);
        assert_eq!(v_star, ring.zero(), "trial {trial}");
        assert_eq!(pp.a.mul_vec(ring, &r_star), s.c0);
        let beta_sq = p.pob_sigma_sq(coms.len()) * 2 * (p.n_rand() * p.d) as u128;
        check_weak_opening_bdlop(ring, p.omega, &pp.a, &pp.b, &s.c0, std::slice::from_ref(&s.c3), &cbar, &r_star, &[v_star], beta_sq)
            .unwrap();
    }
}

/// Bins centered coefficients in steps of `sigma / 3`, tails folded into the end bins.
fn histogram(xs: &[i128], sigma: f64) -> Vec<f64> {
    let mut h = vec![0f64; 20];
    for &x in xs {
        let b = ((x as f64 / sigma) * 3.0).floor().clamp(-10.0, 9.0) as i64 + 10;
        h[b as usize] += 1.0;
    }
    h
}

/// Total variation distance and two-sample chi-square statistic.
fn compare(a: &[i128], b: &[i128], sigma: f64) -> (f64, f64) {
    let (ha, hb) = (histogram(a, sigma), histogram(b, sigma));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let tv = 0.5 * ha.iter().zip(&hb).map(|(x, y)| (x / na - y / nb).abs()).sum::<f64>();
    let chi2 = ha
        .iter()
        .zip(&hb)
        .filter(|(x, y)| *x + *y > 0.0)
        .map(|(x, y)| (x * (nb / na).sqrt() - y * (na / nb).sqrt()).powi(2) / (x + y))
        .sum();
    (tv, chi2)
}

/// Chi-square critical value for 19 degrees of freedom at alpha = 0.001.
const CHI2_19_999: f64 = 43.82;

#[test]
fn balance_simulator_matches_honest_responses() {
    let f = fx();
    let (pp, ring, p) = (&f.pp, &f.pp.ring, &f.pp.params);
    let mut g = rng(5);
    let (r, r2) = (chi_polys(ring, &mut g, p.n_rand()), chi_polys(ring, &mut g, p.n_rand()));
    let coms = [
        commit_tx(pp, &f.pk, &ring.constant(9), &r).unwrap(),
        commit_tx(pp, &f.pk, &ring.neg(&ring.constant(9)), &r2).unwrap(),
    ];
    let rs = vec_add(ring, &r, &r2);
    let (mut honest, mut sim) = (Vec::new(), Vec::new());
    for _ in 0..400 {
        let pf = prove_pob(pp, b"hvzk", &coms, &rs, &mut g, &ProveOptions::default()).unwrap();
        honest.extend(flatten_centered(ring, &pf.z));
        let c = sample_challenge(&mut g, p.d, p.omega).to_poly(ring);
        let (w, u, z) = simulate_pob(pp, &coms, &c, &mut g);
        pob_check(pp, &coms, &w, &u, &c, &z).unwrap();
        sim.extend(flatten_centered(ring, &z));
    }
    let (tv, chi2) = compare(&honest, &sim, (p.pob_sigma_sq(coms.len()) as f64).sqrt());
    assert!(tv < 0.02 && chi2 < CHI2_19_999, "tv {tv}, chi2 {chi2}");
}

#[test]
fn message_equality_simulator_matches_honest_responses() {
    let f = fx();
    let (pp, ring, p) = (&f.pp, &f.pp.ring, &f.pp.params);
    let mut g = rng(6);
    let (r, r2) = (chi_polys(ring, &mut g, p.n_rand()), chi_polys(ring, &mut g, p.n_rand()));
    let com = commit_tx(pp, &f.pk, &ring.constant(77), &r).unwrap();
    let com2 = commit_tx(pp, &f.pk, &ring.constant(77), &r2).unwrap();
    let st = Poe2Statement { pk: &f.pk, com: &com, com2: &com2 };
    let (mut honest, mut sim) = (Vec::new(), Vec::new());
    for _ in 0..300 {
        let pf = prove_poe2(pp, b"hvzk", &st, &r, &r2, &mut g, &ProveOptions::default()).unwrap();
        honest.extend(flatten_centered(ring, &pf.z));
        let c = sample_challenge(&mut g, p.d, p.omega).to_poly(ring);
        let (s, ok) = simulate_poe2(pp, &st, &c, &mut g);
        ok.unwrap();
        sim.extend(flatten_centered(ring, &s.z));
    }
    let (tv, chi2) = compare(&honest, &sim, (p.sigma_sq.poe2.sq[0] as f64).sqrt());
    assert!(tv < 0.02 && chi2 < CHI2_19_999, "tv {tv}, chi2 {chi2}");
}

/// Variance of the discrete Gaussian by direct summation of its weights.
fn series_variance(sigma: f64) -> f64 {
    let tail = (14.0 * sigma).ceil() as i64;
    let (mut num, mut den) = (0.0, 0.0);
    for k in -tail..=tail {
        let w = (-(k * k) as f64 / (2.0 * sigma * sigma)).exp();
        num += (k * k) as f64 * w;
        den += w;
    }
    num / den
}

#[test]
fn gaussian_variance_and_tail() {
    for sigma_sq in [9u128, 400, fx().pp.params.sigma_sq.poe2.sq[0]] {
        let s = GaussianSampler::new(sigma_sq);
        let mut g = rng(7);
        let xs = s.sample_vec(&mut g, 1_000_000);
        let mean = xs.iter().map(|&x| x as f64).sum::<f64>() / 1e6;
        let var = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / 1e6;
        let want = series_variance(s.sigma());
        assert!((var / want - 1.0).abs() < 0.02, "sigma^2 {sigma_sq}: variance {var} vs {want}");
        let outside = xs.iter().filter(|&&x| (x as f64).abs() > 6.0 * s.sigma()).count();
        assert!(outside <= 1, "sigma^2 {sigma_sq}: {outside} draws beyond 6 sigma");
    }
}

/// Accepted responses of the rejection step are distributed like fresh
/// Gaussian samples.
#[test]
fn rejection_output_matches_fresh_gaussian() {
    let f = fx();
    let (ring, p) = (&f.pp.ring, &f.pp.params);
    let s2 = p.sigma_sq.poe2.sq[0];
    let gauss = GaussianSampler::new(s2);
    let mut g = rng(8);
    let (mut accepted, mut fresh) = (Vec::new(), Vec::new());
    while accepted.len() < 100_000 {
        let c = sample_challenge(&mut g, p.d, p.omega);
        let r = chi_polys(ring, &mut g, p.n_rand());
        let v: Vec<i128> = r.iter().flat_map(|x| ring.centered(&ring.mul_small(&c.coeffs, x))).collect();
        let z: Vec<i128> = v.iter().map(|&x| x + gauss.sample(&mut g) as i128).collect();
        if rej(&mut g, &z, &v, s2, p.rej_m) {
            accepted.extend(z);
        }
    }
    fresh.extend(gauss.sample_vec(&mut g, accepted.len()).into_iter().map(i128::from));
    let (tv, chi2) = compare(&accepted, &fresh, gauss.sigma());
    assert!(tv < 0.01 && chi2 < CHI2_19_999, "tv {tv}, chi2 {chi2}");
}

/// Ledger state is a pure fold over the setup seed, the genesis row and the
/// transaction bytes.
#[test]
fn ledger_state_is_a_fold_over_transaction_bytes() {
    let genesis = ValueList(vec![vec![6, 1, 0]]);
    let cfg = LedgerConfig { assets: 1, compact: false };
    let (mut a, sks) = Ledger::setup(&ParamSet::desk(), cfg, &genesis, [8; 32]).unwrap();
    let keys: Vec<Option<&SecretKey>> = sks.iter().map(Some).collect();
    let mut g = rng(9);
    let mut log = Vec::new();
    for (from, to, amt) in [(0, 2, 2), (1, 0, 1), (2, 1, 2)] {
        let (tx, _) = a.create_tx(&ValueList::transfer(1, 3, 0, from, to, amt), &keys, &mut g, &CreateOptions::default()).unwrap();
        log.push(tx.encode(&a.pp));
        a.append(tx).unwrap();
    }
    let (mut b, _) = Ledger::setup(&ParamSet::desk(), cfg, &genesis, [8; 32]).unwrap();
    for bytes in &log {
        b.append(Transaction::decode(&b.pp, bytes).unwrap()).unwrap();
    }
    assert_eq!(a.table, b.table);
    assert_eq!(a.id(), b.id());
}

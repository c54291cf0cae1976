//! Randomness: the ternary secret distribution, uniform residues, ternary
//! challenges, discrete Gaussians, `Bin_1` projection matrices and the
//! rejection step that makes masked responses secret-independent.
//!
//! Every sampler takes an explicit RNG so runs are reproducible from a seed.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::ring::{Poly, Ring};

pub fn rng_from_seed(seed: [u8; 32]) -> ChaCha20Rng {
    ChaCha20Rng::from_seed(seed)
}

/// `chi`: `+-1` with probability 5/16 each, `0` with probability 6/16.
pub fn sample_chi<R: RngCore + ?Sized>(rng: &mut R, count: usize) -> Vec<i64> {
    let mut out = Vec::with_capacity(count);
    let mut word = 0u64;
    let mut left = 0;
    for _ in 0..count {
        if left == 0 {
            word = rng.next_u64();
            left = 16;
        }
        let nib = word & 0xf;
        word >>= 4;
        left -= 1;
        out.push(match nib {
            0..=4 => 1,
            5..=9 => -1,
            _ => 0,
        });
    }
    out
}

/// `n` ring elements with `chi` coefficients.
pub fn chi_polys<R: RngCore + ?Sized>(ring: &Ring, rng: &mut R, n: usize) -> Vec<Poly> {
    let c = sample_chi(rng, n * ring.d);
    c.chunks(ring.d).map(|x| ring.from_i64s(x)).collect()
}

/// Uniform residue in `[0, q)` by rejection on the bit length.
pub fn uniform_residue<R: RngCore + ?Sized>(q: u128, rng: &mut R) -> u128 {
    let bits = 128 - q.leading_zeros();
    let mask = if bits == 128 { u128::MAX } else { (1u128 << bits) - 1 };
    loop {
        let x = (((rng.next_u64() as u128) << 64) | rng.next_u64() as u128) & mask;
        if x < q {
            return x;
        }
    }
}

pub fn uniform_poly<R: RngCore + ?Sized>(ring: &Ring, rng: &mut R) -> Poly {
    Poly((0..ring.d).map(|_| uniform_residue(ring.q(), rng)).collect())
}

pub fn uniform_polys<R: RngCore + ?Sized>(ring: &Ring, rng: &mut R, n: usize) -> Vec<Poly> {
    (0..n).map(|_| uniform_poly(ring, rng)).collect()
}

/// Ternary challenge polynomial with `||c||_1 <= omega`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Challenge {
    pub coeffs: Vec<i64>,
}

impl Challenge {
    pub fn to_poly(&self, ring: &Ring) -> Poly {
        ring.from_i64s(&self.coeffs)
    }

    pub fn l1(&self) -> usize {
        self.coeffs.iter().map(|c| c.unsigned_abs() as usize).sum()
    }
}

fn ternary<R: RngCore + ?Sized>(rng: &mut R, n: usize) -> Vec<i64> {
    let mut out = Vec::with_capacity(n);
    let mut word = 0u64;
    let mut left = 0;
    for _ in 0..n {
        if left == 0 {
            word = rng.next_u64();
            left = 32;
        }
        let (z, s) = (word & 1, (word >> 1) & 1);
        word >>= 2;
        left -= 1;
        out.push(if z == 0 {
            0
        } else if s == 0 {
            1
        } else {
            -1
        });
    }
    out
}

/// Coefficients i.i.d. with `P(0) = 1/2`, `P(+-1) = 1/4`; resampled until
/// `||c||_1 <= omega`.
pub fn sample_challenge<R: RngCore + ?Sized>(rng: &mut R, d: usize, omega: usize) -> Challenge {
    loop {
        let c = Challenge { coeffs: ternary(rng, d) };
        if c.l1() <= omega {
            return c;
        }
    }
}

/// Challenge fixed by `sigma_{-1}`: the first half is free, `c_{d-i} = -c_i`,
/// and `c_{d/2} = 0`.
pub fn sample_challenge_stable<R: RngCore + ?Sized>(
    rng: &mut R,
    d: usize,
    omega: usize,
) -> Challenge {
    loop {
        let half = ternary(rng, d / 2);
        let mut coeffs = vec![0i64; d];
        coeffs[..d / 2].copy_from_slice(&half);
        for i in 1..d / 2 {
            coeffs[d - i] = -half[i];
        }
        let c = Challenge { coeffs };
        if c.l1() <= omega {
            return c;
        }
    }
}

const CDT_THRESHOLD: f64 = 64.0;

/// Discrete Gaussian `D_s` over `Z`, `rho(x) = exp(-x^2 / (2 s^2))`.
///
/// Small widths use an inversion table; larger ones round a continuous
/// normal, whose variance excess `1/12` is negligible at those widths.
#[derive(Clone, Debug)]
pub struct GaussianSampler {
    pub sigma_sq: u128,
    sigma: f64,
    cdt: Option<Vec<f64>>,
}

impl GaussianSampler {
    pub fn new(sigma_sq: u128) -> Self {
        assert!(sigma_sq > 0, "sigma must be positive");
        let sigma = (sigma_sq as f64).sqrt();
        let cdt = (sigma < CDT_THRESHOLD).then(|| {
            let tail = (13.0 * sigma).ceil() as i64 + 1;
            let mut w: Vec<f64> = (0..=tail)
                .map(|k| {
                    let r = (-(k * k) as f64 / (2.0 * sigma * sigma)).exp();
                    if k == 0 {
                        r
                    } else {
                        2.0 * r
                    }
                })
                .collect();
            let total: f64 = w.iter().sum();
            let mut acc = 0.0;
            for x in w.iter_mut() {
                acc += *x / total;
                *x = acc;
            }
            w
        });
        GaussianSampler { sigma_sq, sigma, cdt }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> i64 {
        match &self.cdt {
            Some(t) => {
                let u: f64 = rng.random();
                let k = t.partition_point(|&c| c <= u).min(t.len() - 1) as i64;
                if k != 0 && rng.next_u32() & 1 == 1 {
                    -k
                } else {
                    k
                }
            }
            None => {
                let x: f64 = rng.sample(StandardNormal);
                (x * self.sigma).round() as i64
            }
        }
    }

    pub fn sample_vec<R: RngCore + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<i64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }

    /// `n` ring elements with Gaussian coefficients, returned with their integers.
    pub fn sample_polys<R: RngCore + ?Sized>(
        &self,
        ring: &Ring,
        rng: &mut R,
        n: usize,
    ) -> (Vec<Poly>, Vec<i64>) {
        let v = self.sample_vec(rng, n * ring.d);
        (v.chunks(ring.d).map(|c| ring.from_i64s(c)).collect(), v)
    }
}

/// Projection matrix with `Bin_1` entries `a - b` for fair bits `a, b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<i8>,
}

pub fn sample_proj_matrix<R: RngCore + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ProjMatrix {
    let n = rows * cols;
    let mut data = Vec::with_capacity(n);
    let mut word = 0u64;
    let mut left = 0;
    for _ in 0..n {
        if left == 0 {
            word = rng.next_u64();
            left = 32;
        }
        let (a, b) = ((word & 1) as i8, ((word >> 1) & 1) as i8);
        word >>= 2;
        left -= 1;
        data.push(a - b);
    }
    ProjMatrix { rows, cols, data }
}

impl ProjMatrix {
    pub fn entry(&self, r: usize, c: usize) -> i8 {
        self.data[r * self.cols + c]
    }

    /// `R w` over the integers.
    pub fn mul(&self, w: &[i128]) -> Vec<i128> {
        assert_eq!(w.len(), self.cols, "projection width mismatch");
        self.data
            .chunks(self.cols)
            .map(|row| {
                row.iter()
                    .zip(w)
                    .map(|(&a, &x)| match a {
                        1 => x,
                        -1 => -x,
                        _ => 0,
                    })
                    .sum()
            })
            .collect()
    }

    /// `R^T y` over `Z_q` for residues `y` (one per row).
    pub fn tmul_residues(&self, ring: &Ring, y: &[u128]) -> Vec<u128> {
        assert_eq!(y.len(), self.rows, "projection height mismatch");
        let md = &ring.md;
        let mut out = vec![0u128; self.cols];
        for (row, &yr) in self.data.chunks(self.cols).zip(y) {
            if yr == 0 {
                continue;
            }
            let ny = md.neg(yr);
            for (o, &a) in out.iter_mut().zip(row) {
                match a {
                    1 => *o = md.add(*o, yr),
                    -1 => *o = md.add(*o, ny),
                    _ => {}
                }
            }
        }
        out
    }
}

/// Working precision (bits) of the fixed-point exponential.
const EXP_BITS: u64 = 256;

/// Guard bits carried through the series and the squarings.
const EXP_GUARD: u64 = 128;

/// Fixed-point `exp(num / den) * 2^EXP_BITS`, for `num/den` in a moderate range.
/// Results below `2^-EXP_BITS` round to zero.
fn exp_fixed(num: &BigInt, den: &BigInt) -> BigUint {
    let p = EXP_BITS + EXP_GUARD;
    let one = BigInt::one() << p;
    // scale so that |x| / 2^k <= 2^-12
    let mag_bits = (num.magnitude().bits() as i64) - (den.magnitude().bits() as i64) + 1;
    let k = (mag_bits.max(0) + 12) as u64;
    let y: BigInt = (num << p) / (den << k);
    let mut term = one.clone();
    let mut sum = one.clone();
    for i in 1..60u32 {
        term = ((&term * &y) >> p) / BigInt::from(i);
        if term.is_zero() {
            break;
        }
        sum += &term;
    }
    for _ in 0..k {
        sum = (&sum * &sum) >> p;
    }
    (sum >> EXP_GUARD).to_biguint().unwrap_or_default()
}

/// Rejection step: accept with probability
/// `min(1, exp((-2<z,v> + ||v||^2) / (2 sigma^2)) / M)`.
///
/// The exponent is an exact rational and the exponential is evaluated with
/// 256-bit fixed point against a 256-bit uniform draw.
pub fn rej<R: RngCore + ?Sized>(
    rng: &mut R,
    z: &[i128],
    v: &[i128],
    sigma_sq: u128,
    m: u32,
) -> bool {
    assert_eq!(z.len(), v.len(), "rejection vector length mismatch");
    let mut zv = BigInt::zero();
    let mut vv = BigInt::zero();
    for (&a, &b) in z.iter().zip(v) {
        zv += BigInt::from(a) * BigInt::from(b);
        vv += BigInt::from(b) * BigInt::from(b);
    }
    let num: BigInt = vv - (zv << 1usize);
    let den = BigInt::from(sigma_sq) << 1;
    // Clear decisions away from the numerically interesting range.
    let ratio = num.clone() / &den;
    if ratio >= BigInt::from(8) {
        return true;
    }
    if ratio <= BigInt::from(-512) {
        return false;
    }
    let e = exp_fixed(&num, &den);
    let threshold = e / BigUint::from(m);
    if threshold.bits() > EXP_BITS {
        return true;
    }
    let mut bytes = [0u8; (EXP_BITS / 8) as usize];
    rng.fill_bytes(&mut bytes);
    let u = BigUint::from_bytes_le(&bytes);
    u < threshold
}

/// The acceptance probability `rej` implements, as `f64` (diagnostics only).
pub fn acceptance_probability(z: &[i128], v: &[i128], sigma_sq: u128, m: u32) -> f64 {
    let zv: f64 = z.iter().zip(v).map(|(&a, &b)| a as f64 * b as f64).sum();
    let vv: f64 = v.iter().map(|&b| (b as f64).powi(2)).sum();
    ((vv - 2.0 * zv) / (2.0 * sigma_sq as f64)).exp().min(m as f64) / m as f64
}

/// Signed magnitude helper used when exponent numerators arrive as `i128`.
pub fn big(x: i128) -> BigInt {
    if x < 0 {
        BigInt::from_biguint(Sign::Minus, BigUint::from(x.unsigned_abs()))
    } else {
        BigInt::from(x)
    }
}

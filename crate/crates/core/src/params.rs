//! Parameter sets: the production set, a desk-scale set for tests, validation
//! of every structural invariant, and a TOML text encoding.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::ring::{Ring, RingError};

/// Squared Gaussian widths for one protocol role.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleSigmas {
    #[serde(with = "decimal_u128_vec")]
    pub sq: Vec<u128>,
}

/// Standard deviations per protocol, stored squared so bounds compare exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sigmas {
    /// Balance proof width for a single summed commitment; scales with the count.
    pub pob: RoleSigmas,
    pub poc: RoleSigmas,
    pub poe: RoleSigmas,
    pub pokw: RoleSigmas,
    pub poa: RoleSigmas,
    pub poa_compact: RoleSigmas,
    pub poe2: RoleSigmas,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSet {
    pub name: String,
    #[serde(with = "decimal_big")]
    pub q: BigUint,
    pub d: usize,
    pub l: usize,
    pub kappa: usize,
    pub lambda: usize,
    pub n_msg: usize,
    pub omega: usize,
    #[serde(with = "decimal_big")]
    pub sqrt_q: BigUint,
    pub value_bits: u32,
    pub beta_bits: u32,
    pub rej_m: u32,
    pub proj_rows: usize,
    /// Column length the extraction noise budget is sized for.
    pub max_column: usize,
    pub sigma_sq: Sigmas,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parameter invariant violated: {invariant}")]
pub struct Violation {
    pub invariant: String,
}

fn violation(s: impl Into<String>) -> Violation {
    Violation { invariant: s.into() }
}

#[derive(Debug, Error)]
pub enum ParamsError {
    #[error(transparent)]
    Invalid(#[from] Violation),
    #[error("cannot parse parameter file: {0}")]
    Parse(String),
    #[error("ring construction failed: {0}")]
    Ring(#[from] RingError),
}

impl ParamSet {
    /// Production set: `d = 256`, `l = 128`, `kappa = lambda = 16`, `q` the first
    /// admissible prime above `2^100`.
    pub fn paper() -> Self {
        let l = 128;
        let q = search_prime_above(1u128 << 100, l).expect("prime exists");
        Self::build("paper", q, 256, l, 16, 16, 64, 64)
    }

    /// Desk-scale set: `d = 64`, `l = 32`, `kappa = lambda = 2`, `q < 2^62`.
    pub fn desk() -> Self {
        let l = 32;
        let q = search_prime_below(1u128 << 62, l).expect("prime exists");
        Self::build("desk", q, 64, l, 2, 2, 32, 16)
    }

    /// Assembles a set and derives omega and every sigma from the formulas.
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        name: &str,
        q: u128,
        d: usize,
        l: usize,
        kappa: usize,
        lambda: usize,
        value_bits: u32,
        beta_bits: u32,
    ) -> Self {
        let qb = BigUint::from(q);
        let omega = challenge_omega(d);
        let mut p = ParamSet {
            name: name.to_string(),
            sqrt_q: nearest_sqrt(&qb),
            q: qb,
            d,
            l,
            kappa,
            lambda,
            n_msg: 3,
            omega,
            value_bits,
            beta_bits,
            rej_m: 3,
            proj_rows: 256,
            max_column: 64,
            sigma_sq: Sigmas::empty(),
        };
        p.sigma_sq = p.expected_sigmas();
        p
    }

    /// `kappa + lambda + 3`, the randomness dimension in ring elements.
    pub fn n_rand(&self) -> usize {
        self.kappa + self.lambda + self.n_msg
    }

    /// `(kappa + lambda + 3) d`, the randomness dimension in coefficients.
    pub fn big_n(&self) -> usize {
        self.n_rand() * self.d
    }

    /// Ring elements in the key-equation witness `s1 || e1 || s2 || e2`.
    pub fn m_len(&self) -> usize {
        2 * (2 * self.kappa + self.lambda + self.n_msg)
    }

    /// Ring elements of the projection mask (`proj_rows / d`).
    pub fn proj_polys(&self) -> usize {
        self.proj_rows / self.d
    }

    /// BDLOP dimension of the compact range proof: `kappa + lambda + 3 + beta`.
    pub fn compact_mu(&self) -> usize {
        self.n_rand() + self.beta_bits as usize
    }

    pub fn q_u128(&self) -> u128 {
        self.q.to_u128().expect("validated modulus fits u128")
    }

    pub fn sqrt_q_u128(&self) -> u128 {
        self.sqrt_q.to_u128().expect("validated modulus fits u128")
    }

    /// Balance-proof sigma^2 when `n` commitments are summed.
    pub fn pob_sigma_sq(&self, n: usize) -> u128 {
        self.sigma_sq.pob.sq[0] * n.max(1) as u128
    }

    fn expected_sigmas(&self) -> Sigmas {
        let w2 = (self.omega as u128).pow(2);
        let d = self.d as u128;
        let n = self.big_n() as u128;
        let (k, lam) = (self.kappa as u128, self.lambda as u128);
        let s = |v: Vec<u128>| RoleSigmas { sq: v };
        let base = 121 * w2 * n;
        let mu_d = self.compact_mu() as u128 * d;
        let beta_d = self.beta_bits as u128 * d;
        Sigmas {
            pob: s(vec![base]),
            poc: s(vec![base, base, 121 * 337 * n]),
            poe: s(vec![121 * w2 * (4 * k + 2 * lam + 6) * d, base, 121 * 337 * 4 * n * n]),
            pokw: s(vec![
                121 * w2 * (4 * k + 2 * lam + 6) * d,
                base,
                121 * 337 * self.m_len() as u128 * d,
            ]),
            poa: s(vec![base]),
            poa_compact: s(vec![121 * w2 * mu_d, 121 * 337 * beta_d, base]),
            poe2: s(vec![base]),
        }
    }

    /// Checks every invariant in order and names the first one violated.
    pub fn validate(&self) -> Result<(), Violation> {
        if self.d < 2 || !self.d.is_power_of_two() {
            return Err(violation("degree not power of two"));
        }
        if self.l == 0 || !self.l.is_power_of_two() || !self.d.is_multiple_of(self.l) {
            return Err(violation("splitting factor must be a power of two dividing d"));
        }
        if self.q.bits() >= 126 {
            return Err(violation("modulus too wide (needs q < 2^126)"));
        }
        if !is_probable_prime(&self.q) {
            return Err(violation("modulus not prime"));
        }
        let four_l = BigUint::from(4 * self.l);
        if &self.q % &four_l != BigUint::from(2 * self.l + 1) {
            return Err(violation("splitting condition"));
        }
        if self.sqrt_q != nearest_sqrt(&self.q) {
            return Err(violation("sqrt_q is not the nearest integer to sqrt(q)"));
        }
        if self.n_msg != 3 {
            return Err(violation("transaction commitments carry exactly 3 message slots"));
        }
        if self.kappa == 0 || self.lambda == 0 {
            return Err(violation("module ranks must be positive"));
        }
        if self.proj_rows != 256 || !self.proj_rows.is_multiple_of(self.d) {
            return Err(violation("projection rows must be 256 and a multiple of d"));
        }
        if self.omega == 0 || self.omega > self.d || self.omega < challenge_omega(self.d) {
            return Err(violation("omega below the challenge l1 tail bound"));
        }
        let q = self.q_u128();
        if self.value_bits == 0
            || self.value_bits as usize > self.l
            || self.value_bits >= 126
            || (1u128 << self.value_bits) >= q / 2
        {
            return Err(violation("value bits must fit the slot count and the modulus"));
        }
        if self.beta_bits == 0
            || !self.d.is_multiple_of(self.beta_bits as usize)
            || self.beta_bits >= 126
            || (1u128 << self.beta_bits) >= q / 2
        {
            return Err(violation("compact bit width must divide d and fit the modulus"));
        }
        if self.rej_m < 2 {
            return Err(violation("rejection bound M must be at least 2"));
        }
        if self.sigma_sq != self.expected_sigmas() {
            let e = self.expected_sigmas();
            let role = [
                ("pob", &self.sigma_sq.pob, &e.pob),
                ("poc", &self.sigma_sq.poc, &e.poc),
                ("poe", &self.sigma_sq.poe, &e.poe),
                ("pokw", &self.sigma_sq.pokw, &e.pokw),
                ("poa", &self.sigma_sq.poa, &e.poa),
                ("poa_compact", &self.sigma_sq.poa_compact, &e.poa_compact),
                ("poe2", &self.sigma_sq.poe2, &e.poe2),
            ]
            .into_iter()
            .find(|(_, a, b)| a != b)
            .map(|(n, _, _)| n)
            .unwrap_or("?");
            return Err(violation(format!("sigma formula for {role}")));
        }
        // Worst case: every product e_i r_i has magnitude 1 over a full column.
        let worst = (self.big_n() * self.max_column.max(1)) as u128;
        let sq = self.sqrt_q_u128();
        if worst > sq / 4 || worst.saturating_mul(sq + 1) > q / 2 {
            return Err(violation("extraction noise budget"));
        }
        Ok(())
    }

    pub fn ring(&self) -> Result<Ring, ParamsError> {
        self.validate()?;
        Ok(Ring::new(self.q_u128(), self.d, self.l)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("parameter set serializes")
    }

    pub fn from_toml(s: &str) -> Result<Self, ParamsError> {
        let p: ParamSet = toml::from_str(s).map_err(|e| ParamsError::Parse(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    /// Resolves `paper`, `desk`, or a path to a TOML file.
    pub fn resolve(spec: &str) -> Result<Self, ParamsError> {
        match spec {
            "paper" => Ok(Self::paper()),
            "desk" => Ok(Self::desk()),
            path => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ParamsError::Parse(format!("{path}: {e}")))?;
                Self::from_toml(&text)
            }
        }
    }
}

impl Sigmas {
    fn empty() -> Self {
        let e = || RoleSigmas { sq: vec![] };
        Sigmas { pob: e(), poc: e(), poe: e(), pokw: e(), poa: e(), poa_compact: e(), poe2: e() }
    }
}

impl fmt::Display for ParamSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: d={} l={} kappa={} lambda={} omega={} log2(q)={}",
            self.name,
            self.d,
            self.l,
            self.kappa,
            self.lambda,
            self.omega,
            self.q.bits()
        )
    }
}

/// Smallest `omega` with `Pr(||c||_1 > omega) <= 2^-128` when each coefficient
/// is nonzero with probability 1/2 (so `||c||_1 ~ Binomial(d, 1/2)`).
pub fn challenge_omega(d: usize) -> usize {
    // tail(w) = sum_{k > w} C(d, k); need tail(w) <= 2^(d - 128)
    if d <= 128 {
        return d;
    }
    let limit = BigUint::one() << (d - 128);
    let mut binom = vec![BigUint::one(); d + 1];
    for k in 1..=d {
        binom[k] = &binom[k - 1] * BigUint::from(d - k + 1) / BigUint::from(k);
    }
    let mut tail = BigUint::zero();
    for w in (0..=d).rev() {
        // tail currently = sum_{k > w}
        if tail > limit {
            return w + 1;
        }
        tail += &binom[w];
    }
    0
}

/// Nearest integer to `sqrt(x)`.
pub fn nearest_sqrt(x: &BigUint) -> BigUint {
    let f = x.sqrt();
    // round up when x >= (f + 1/2)^2, i.e. 4x >= (2f + 1)^2
    let two_f1: BigUint = &f * 2u32 + 1u32;
    if x * 4u32 >= &two_f1 * &two_f1 {
        f + 1u32
    } else {
        f
    }
}

/// Miller-Rabin with the first 24 prime bases.
pub fn is_probable_prime(n: &BigUint) -> bool {
    const BASES: [u32; 24] =
        [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89];
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    for &b in &BASES {
        let b = BigUint::from(b);
        if n == &b {
            return true;
        }
        if (n % &b).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let dd = &nm1 >> s;
    'outer: for &b in &BASES {
        let mut x = BigUint::from(b).modpow(&dd, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn first_candidate(start: u128, l: usize, up: bool) -> u128 {
    let m = 4 * l as u128;
    let r = 2 * l as u128 + 1;
    let base = start - start % m + r;
    if up {
        if base >= start {
            base
        } else {
            base + m
        }
    } else if base < start {
        base
    } else {
        base - m
    }
}

/// First prime `>= start` with `q = 2l + 1 (mod 4l)`.
pub fn search_prime_above(start: u128, l: usize) -> Option<u128> {
    let step = 4 * l as u128;
    let mut c = first_candidate(start, l, true);
    for _ in 0..1_000_000 {
        if is_probable_prime(&BigUint::from(c)) {
            return Some(c);
        }
        c = c.checked_add(step)?;
    }
    None
}

/// Largest prime `< start` with `q = 2l + 1 (mod 4l)`.
pub fn search_prime_below(start: u128, l: usize) -> Option<u128> {
    let step = 4 * l as u128;
    let mut c = first_candidate(start, l, false);
    for _ in 0..1_000_000 {
        if is_probable_prime(&BigUint::from(c)) {
            return Some(c);
        }
        c = c.checked_sub(step)?;
    }
    None
}

mod decimal_big {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::parse_bytes(s.trim().as_bytes(), 10).ok_or_else(|| D::Error::custom("bad decimal"))
    }
}

mod decimal_u128_vec {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[u128], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u128>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| s.trim().parse::<u128>().map_err(D::Error::custom)).collect()
    }
}

//! Arithmetic modulo an odd prime `q < 2^126`.
//!
//! Residues are stored canonically in `[0, q)` as `u128`. Multiplication uses
//! Montgomery reduction with a one-limb (`q < 2^63`) or two-limb path chosen
//! once at construction.

/// Full 128x128 -> 256 bit product, returned as (hi, lo).
#[inline(always)]
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    let (a1, a0) = ((a >> 64) as u64 as u128, a as u64 as u128);
    let (b1, b0) = ((b >> 64) as u64 as u128, b as u64 as u128);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 as u64 as u128) + (p10 as u64 as u128);
    let lo = (p00 as u64 as u128) | (mid << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (hi, lo)
}

#[derive(Clone, Debug)]
pub struct Modulus {
    q: u128,
    half: u128,
    wide: bool,
    // -q^{-1} mod 2^64 / 2^128
    qinv64: u64,
    qinv128: u128,
    // R^2 mod q for the active Montgomery radix
    r2: u128,
    // R mod q
    r1: u128,
    bytes: usize,
}

impl Modulus {
    /// Builds the context. `q` must be odd and below `2^126`.
    pub fn new(q: u128) -> Self {
        assert!(q & 1 == 1 && q > 2 && q < (1u128 << 126), "modulus must be odd, 2 < q < 2^126");
        let wide = q >= (1u128 << 63);
        // Newton iteration for q^{-1} mod 2^128
        let mut inv: u128 = 1;
        for _ in 0..7 {
            inv = inv.wrapping_mul(2u128.wrapping_sub(q.wrapping_mul(inv)));
        }
        let qinv128 = inv.wrapping_neg();
        let qinv64 = (inv as u64).wrapping_neg();
        let bits = 128 - q.leading_zeros() as usize;
        let mut m = Modulus {
            q,
            half: (q - 1) / 2,
            wide,
            qinv64,
            qinv128,
            r2: 0,
            r1: 0,
            bytes: bits.div_ceil(8),
        };
        // R mod q by repeated doubling, then R^2 = mont^{-1}... computed directly.
        let rbits = if wide { 128 } else { 64 };
        let mut r = 1u128 % q;
        for _ in 0..rbits {
            r = m.add(r, r);
        }
        m.r1 = r;
        let mut r2 = r;
        for _ in 0..rbits {
            r2 = m.add(r2, r2);
        }
        m.r2 = r2;
        m
    }

    #[inline(always)]
    pub fn q(&self) -> u128 {
        self.q
    }

    /// Bytes per coefficient in the canonical encoding.
    pub fn byte_len(&self) -> usize {
        self.bytes
    }

    pub fn is_wide(&self) -> bool {
        self.wide
    }

    #[inline(always)]
    pub fn add(&self, a: u128, b: u128) -> u128 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline(always)]
    pub fn sub(&self, a: u128, b: u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline(always)]
    pub fn neg(&self, a: u128) -> u128 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    /// Montgomery product `a * b * R^{-1} mod q`.
    #[inline(always)]
    pub fn mont(&self, a: u128, b: u128) -> u128 {
        if !self.wide {
            let q = self.q as u64;
            let t = (a as u64 as u128) * (b as u64 as u128);
            let m = (t as u64).wrapping_mul(self.qinv64);
            let mq = (m as u128) * (q as u128);
            let (s, carry) = t.overflowing_add(mq);
            let mut r = (s >> 64) | ((carry as u128) << 64);
            if r >= q as u128 {
                r -= q as u128;
            }
            r
        } else {
            let (th, tl) = mul_wide(a, b);
            let m = tl.wrapping_mul(self.qinv128);
            let (mh, ml) = mul_wide(m, self.q);
            let (_, c) = tl.overflowing_add(ml);
            let mut r = th + mh + c as u128;
            if r >= self.q {
                r -= self.q;
            }
            r
        }
    }

    /// Converts into Montgomery form (`a * R mod q`).
    #[inline(always)]
    pub fn to_mont(&self, a: u128) -> u128 {
        self.mont(a, self.r2)
    }

    #[inline(always)]
    pub fn mul(&self, a: u128, b: u128) -> u128 {
        self.mont(self.mont(a, b), self.r2)
    }

    pub fn pow(&self, a: u128, mut e: u128) -> u128 {
        let mut base = self.to_mont(a);
        let mut acc = self.r1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mont(acc, base);
            }
            base = self.mont(base, base);
            e >>= 1;
        }
        self.mont(acc, 1)
    }

    /// Inverse via Fermat; `a` must be nonzero.
    pub fn inv(&self, a: u128) -> u128 {
        debug_assert!(!a.is_multiple_of(self.q));
        self.pow(a, self.q - 2)
    }

    #[inline(always)]
    pub fn from_i64(&self, x: i64) -> u128 {
        if x >= 0 {
            (x as u128) % self.q
        } else {
            self.neg(((-(x as i128)) as u128) % self.q)
        }
    }

    #[inline(always)]
    pub fn from_i128(&self, x: i128) -> u128 {
        if x >= 0 {
            (x as u128) % self.q
        } else {
            self.neg(x.unsigned_abs() % self.q)
        }
    }

    /// Centered representative in `[-(q-1)/2, (q-1)/2]`.
    #[inline(always)]
    pub fn centered(&self, a: u128) -> i128 {
        if a > self.half {
            -((self.q - a) as i128)
        } else {
            a as i128
        }
    }
}

/// Centered reduction of an arbitrary integer modulo an odd `q`.
pub fn mod_pm(r: i128, q: u128) -> i128 {
    assert!(q & 1 == 1, "mod_pm needs an odd modulus");
    let q = q as i128;
    let mut x = r.rem_euclid(q);
    if x > (q - 1) / 2 {
        x -= q;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use proptest::prelude::*;

    const DESK_Q: u128 = 4_611_686_018_427_387_847; // any odd value works for the mul oracle
    const WIDE_Q: u128 = (1u128 << 100) + 277;

    fn oracle(a: u128, b: u128, q: u128) -> u128 {
        let p = BigUint::from(a) * BigUint::from(b) % BigUint::from(q);
        p.try_into().unwrap()
    }

    #[test]
    fn mod_pm_examples() {
        assert_eq!(mod_pm(7, 5), 2);
        assert_eq!(mod_pm(3, 5), -2);
        assert_eq!(mod_pm(0, 97), 0);
        assert_eq!(mod_pm(-3, 5), 2);
        assert_eq!(mod_pm(-4, 5), 1);
    }

    #[test]
    fn centered_of_q_minus_one() {
        let m = Modulus::new(WIDE_Q);
        assert_eq!(m.centered(WIDE_Q - 1), -1);
        assert_eq!(m.centered(0), 0);
    }

    #[test]
    fn inverse_and_pow() {
        for q in [DESK_Q, WIDE_Q] {
            let m = Modulus::new(q);
            for a in [1u128, 2, 3, 12345678901234567, q - 1] {
                assert_eq!(m.mul(a, m.inv(a)), 1);
            }
            assert_eq!(m.pow(3, 0), 1);
            assert_eq!(m.pow(3, 5), 243);
        }
    }

    proptest! {
        #[test]
        fn mul_matches_bigint_narrow(a in 0..DESK_Q, b in 0..DESK_Q) {
            let m = Modulus::new(DESK_Q);
            prop_assert_eq!(m.mul(a, b), oracle(a, b, DESK_Q));
        }

        #[test]
        fn mul_matches_bigint_wide(a in 0..WIDE_Q, b in 0..WIDE_Q) {
            let m = Modulus::new(WIDE_Q);
            prop_assert_eq!(m.mul(a, b), oracle(a, b, WIDE_Q));
        }

        #[test]
        fn add_sub_roundtrip(a in 0..WIDE_Q, b in 0..WIDE_Q) {
            let m = Modulus::new(WIDE_Q);
            prop_assert_eq!(m.sub(m.add(a, b), b), a);
            prop_assert_eq!(m.add(a, m.neg(a)), 0);
        }

        #[test]
        fn mod_pm_range(r in any::<i64>(), q in (3u64..1_000_000).prop_map(|x| x | 1)) {
            let c = mod_pm(r as i128, q as u128);
            prop_assert!(c.abs() <= ((q as i128) - 1) / 2);
            prop_assert_eq!((r as i128 - c).rem_euclid(q as i128), 0);
        }
    }
}

//! The cyclotomic ring `R_q = Z_q[X]/(X^d + 1)` with a partially splitting NTT.
//!
//! `X^d + 1` factors into `l` irreducible pieces `X^{d/l} - zeta^{2j+1}` when
//! `q = 2l + 1 (mod 4l)`. The NTT maps a polynomial to its `l` residues; each
//! residue ("slot") is a polynomial of degree `< d/l`.

mod modulus;
pub mod vec;

pub use modulus::{mod_pm, Modulus};
pub use vec::{Mat, NttVec};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RingError {
    #[error("automorphism index {0} is not a unit modulo 2d")]
    NotUnit(i64),
    #[error("length mismatch: {0} vs {1}")]
    Length(usize, usize),
    #[error("element is not invertible")]
    NotInvertible,
    #[error("invalid ring shape: {0}")]
    Shape(&'static str),
}

/// Coefficient-domain polynomial; every coefficient lies in `[0, q)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly(pub Vec<u128>);

/// Polynomial in the internal NTT domain (slots laid out in butterfly order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NttPoly(pub Vec<u128>);

/// Canonically ordered residues: `slots[j] = p mod (X^{d/l} - zeta^{2j+1})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NttVector {
    pub slots: Vec<Vec<u128>>,
}

/// Norms of a polynomial or vector, computed on centered representatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Norms {
    pub inf: u128,
    pub l1: u128,
    /// Exact squared l2 norm, saturating at `u128::MAX`.
    pub l2_sq: u128,
}

impl Norms {
    pub fn l2(&self) -> f64 {
        (self.l2_sq as f64).sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct Ring {
    pub d: usize,
    pub l: usize,
    /// Slot width `d/l`.
    pub m: usize,
    pub md: Modulus,
    zeta: u128,
    levels: usize,
    // per butterfly block, Montgomery-form roots (index 1.. like a heap)
    tw: Vec<u128>,
    itw: Vec<u128>,
    // root zeta^e of each final block (X^m - zeta^e)
    slot_root: Vec<u128>,
    slot_root_mont: Vec<u128>,
    // canonical index j for each internal block
    perm: Vec<usize>,
    l_inv_mont: u128,
}

impl Ring {
    /// Builds tables for `d`, `l` and prime `q` with `q = 2l + 1 (mod 4l)`.
    pub fn new(q: u128, d: usize, l: usize) -> Result<Self, RingError> {
        if !d.is_power_of_two() || d < 2 {
            return Err(RingError::Shape("degree not power of two"));
        }
        if !l.is_power_of_two() || !d.is_multiple_of(l) {
            return Err(RingError::Shape("l must be a power of two dividing d"));
        }
        let four_l = 4 * l as u128;
        if q % four_l != 2 * l as u128 + 1 {
            return Err(RingError::Shape("splitting condition"));
        }
        let md = Modulus::new(q);
        let zeta = find_root(&md, l).ok_or(RingError::Shape("no primitive 2l-th root"))?;
        let levels = l.trailing_zeros() as usize;
        let mut tw = vec![0u128; l.max(1)];
        let mut itw = vec![0u128; l.max(1)];
        // exponents per block at each level, heap indexed: node k has children 2k, 2k+1
        let mut exps = vec![0usize; 2 * l];
        exps[1] = l;
        let two_l = 2 * l;
        for k in 1..l {
            let e = exps[k];
            debug_assert!(e.is_multiple_of(2));
            let half = e / 2;
            let r = md.pow(zeta, half as u128);
            tw[k] = md.to_mont(r);
            itw[k] = md.to_mont(md.inv(r));
            exps[2 * k] = half;
            exps[2 * k + 1] = (half + l) % two_l;
        }
        let slot_exp: Vec<usize> = (0..l).map(|b| exps[l + b]).collect();
        let slot_root: Vec<u128> = slot_exp.iter().map(|&e| md.pow(zeta, e as u128)).collect();
        let slot_root_mont = slot_root.iter().map(|&r| md.to_mont(r)).collect();
        let perm = slot_exp.iter().map(|&e| (e - 1) / 2).collect();
        let l_inv_mont = md.to_mont(md.inv(l as u128 % q));
        Ok(Ring {
            d,
            l,
            m: d / l,
            md,
            zeta,
            levels,
            tw,
            itw,
            slot_root,
            slot_root_mont,
            perm,
            l_inv_mont,
        })
    }

    pub fn q(&self) -> u128 {
        self.md.q()
    }

    /// The primitive `2l`-th root of unity defining the slots.
    pub fn zeta(&self) -> u128 {
        self.zeta
    }

    pub fn zero(&self) -> Poly {
        Poly(vec![0; self.d])
    }

    pub fn one(&self) -> Poly {
        self.constant(1)
    }

    pub fn constant(&self, c: u128) -> Poly {
        let mut p = self.zero();
        p.0[0] = c % self.q();
        p
    }

    pub fn monomial(&self, k: usize) -> Poly {
        let mut p = self.zero();
        let k2 = k % (2 * self.d);
        if k2 < self.d {
            p.0[k2] = 1;
        } else {
            p.0[k2 - self.d] = self.q() - 1;
        }
        p
    }

    pub fn from_i64s(&self, c: &[i64]) -> Poly {
        assert_eq!(c.len(), self.d);
        Poly(c.iter().map(|&x| self.md.from_i64(x)).collect())
    }

    pub fn centered(&self, p: &Poly) -> Vec<i128> {
        p.0.iter().map(|&x| self.md.centered(x)).collect()
    }

    /// Centered coefficients narrowed to `i64`; `None` if any exceeds the range.
    pub fn centered_i64(&self, p: &Poly) -> Option<Vec<i64>> {
        p.0.iter().map(|&x| i64::try_from(self.md.centered(x)).ok()).collect()
    }

    pub fn add(&self, a: &Poly, b: &Poly) -> Poly {
        Poly(a.0.iter().zip(&b.0).map(|(&x, &y)| self.md.add(x, y)).collect())
    }

    pub fn sub(&self, a: &Poly, b: &Poly) -> Poly {
        Poly(a.0.iter().zip(&b.0).map(|(&x, &y)| self.md.sub(x, y)).collect())
    }

    pub fn neg(&self, a: &Poly) -> Poly {
        Poly(a.0.iter().map(|&x| self.md.neg(x)).collect())
    }

    pub fn add_assign(&self, a: &mut Poly, b: &Poly) {
        for (x, &y) in a.0.iter_mut().zip(&b.0) {
            *x = self.md.add(*x, y);
        }
    }

    pub fn sub_assign(&self, a: &mut Poly, b: &Poly) {
        for (x, &y) in a.0.iter_mut().zip(&b.0) {
            *x = self.md.sub(*x, y);
        }
    }

    pub fn scale(&self, a: &Poly, s: u128) -> Poly {
        let sm = self.md.to_mont(s % self.q());
        Poly(a.0.iter().map(|&x| self.md.mont(x, sm)).collect())
    }

    /// Forward transform into the internal slot layout.
    pub fn ntt(&self, p: &Poly) -> NttPoly {
        let mut a = p.0.clone();
        let md = &self.md;
        let mut len = self.d;
        let mut k = 1usize;
        for _ in 0..self.levels {
            let half = len / 2;
            for start in (0..self.d).step_by(len) {
                let w = self.tw[k];
                k += 1;
                for i in start..start + half {
                    let x = a[i];
                    let y = md.mont(a[i + half], w);
                    a[i] = md.add(x, y);
                    a[i + half] = md.sub(x, y);
                }
            }
            len = half;
        }
        NttPoly(a)
    }

    pub fn intt(&self, p: &NttPoly) -> Poly {
        let mut a = p.0.clone();
        let md = &self.md;
        let mut len = self.m * 2;
        for lev in (0..self.levels).rev() {
            let half = len / 2;
            let first = 1usize << lev;
            for (b, start) in (0..self.d).step_by(len).enumerate() {
                let w = self.itw[first + b];
                for i in start..start + half {
                    let x = a[i];
                    let y = a[i + half];
                    a[i] = md.add(x, y);
                    a[i + half] = md.mont(md.sub(x, y), w);
                }
            }
            len *= 2;
        }
        for x in a.iter_mut() {
            *x = md.mont(*x, self.l_inv_mont);
        }
        Poly(a)
    }

    /// Slot-wise product in the internal NTT domain.
    pub fn ntt_mul(&self, a: &NttPoly, b: &NttPoly) -> NttPoly {
        let mut out = vec![0u128; self.d];
        self.ntt_mul_acc(&mut out, a, b);
        NttPoly(out)
    }

    /// `acc += a * b` slot-wise.
    pub fn ntt_mul_acc(&self, acc: &mut [u128], a: &NttPoly, b: &NttPoly) {
        let md = &self.md;
        let m = self.m;
        if m == 2 {
            for s in 0..self.l {
                let i = 2 * s;
                let (a0, a1, b0, b1) = (a.0[i], a.0[i + 1], b.0[i], b.0[i + 1]);
                // both sums carry one R^{-1} factor, removed by a single conversion
                let t11 = md.mont(md.mont(a1, b1), self.slot_root_mont[s]);
                let c0 = md.to_mont(md.add(md.mont(a0, b0), t11));
                let c1 = md.to_mont(md.add(md.mont(a0, b1), md.mont(a1, b0)));
                acc[i] = md.add(acc[i], c0);
                acc[i + 1] = md.add(acc[i + 1], c1);
            }
            return;
        }
        for s in 0..self.l {
            let base = s * m;
            let mut tmp = vec![0u128; 2 * m];
            for i in 0..m {
                for j in 0..m {
                    tmp[i + j] = md.add(tmp[i + j], md.mul(a.0[base + i], b.0[base + j]));
                }
            }
            for k in 0..m {
                let hi = if k + m < 2 * m - 1 { md.mul(tmp[k + m], self.slot_root[s]) } else { 0 };
                acc[base + k] = md.add(acc[base + k], md.add(tmp[k], hi));
            }
        }
    }

    /// Product in `R_q` via the NTT.
    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        self.intt(&self.ntt_mul(&self.ntt(a), &self.ntt(b)))
    }

    /// O(d^2) negacyclic convolution, the reference multiplication.
    pub fn mul_schoolbook(&self, a: &Poly, b: &Poly) -> Poly {
        let md = &self.md;
        let d = self.d;
        let mut out = vec![0u128; d];
        for i in 0..d {
            if a.0[i] == 0 {
                continue;
            }
            for j in 0..d {
                let p = md.mul(a.0[i], b.0[j]);
                let k = i + j;
                if k < d {
                    out[k] = md.add(out[k], p);
                } else {
                    out[k - d] = md.sub(out[k - d], p);
                }
            }
        }
        Poly(out)
    }

    /// Canonically ordered residues.
    pub fn ntt_slots(&self, p: &Poly) -> NttVector {
        let n = self.ntt(p);
        let mut slots = vec![Vec::new(); self.l];
        for b in 0..self.l {
            slots[self.perm[b]] = n.0[b * self.m..(b + 1) * self.m].to_vec();
        }
        NttVector { slots }
    }

    pub fn from_slots(&self, v: &NttVector) -> Poly {
        let mut n = vec![0u128; self.d];
        for b in 0..self.l {
            n[b * self.m..(b + 1) * self.m].copy_from_slice(&v.slots[self.perm[b]]);
        }
        self.intt(&NttPoly(n))
    }

    /// Exponent `2j+1` of the root for canonical slot `j`.
    pub fn slot_exponent(&self, j: usize) -> usize {
        2 * j + 1
    }

    /// `(1/l) * sum_j NTT(p)_j`, a polynomial of degree `< d/l`.
    pub fn ntt_average(&self, p: &Poly) -> Vec<u128> {
        let n = self.ntt(p);
        let md = &self.md;
        let mut acc = vec![0u128; self.m];
        for b in 0..self.l {
            for k in 0..self.m {
                acc[k] = md.add(acc[k], n.0[b * self.m + k]);
            }
        }
        let linv = md.inv(self.l as u128 % self.q());
        acc.iter().map(|&x| md.mul(x, linv)).collect()
    }

    /// `sigma_i(X) = X^i` for odd `i` (negative values taken mod `2d`).
    pub fn automorphism(&self, p: &Poly, i: i64) -> Result<Poly, RingError> {
        let two_d = 2 * self.d as i64;
        let e = i.rem_euclid(two_d);
        if e % 2 == 0 {
            return Err(RingError::NotUnit(i));
        }
        let e = e as usize;
        let mut out = vec![0u128; self.d];
        for (k, &c) in p.0.iter().enumerate() {
            let t = (k * e) % (2 * self.d);
            if t < self.d {
                out[t] = self.md.add(out[t], c);
            } else {
                out[t - self.d] = self.md.sub(out[t - self.d], c);
            }
        }
        Ok(Poly(out))
    }

    /// `sigma_{-1}`: coefficient `k` moves to `-X^{d-k}`.
    pub fn sigma_m1(&self, p: &Poly) -> Poly {
        let mut out = vec![0u128; self.d];
        out[0] = p.0[0];
        for k in 1..self.d {
            out[self.d - k] = self.md.neg(p.0[k]);
        }
        Poly(out)
    }

    /// Constant coefficient of `sigma_{-1}(x)^T y`, i.e. the coefficient inner product.
    pub fn const_coeff_inner(&self, x: &[Poly], y: &[Poly]) -> Result<u128, RingError> {
        if x.len() != y.len() {
            return Err(RingError::Length(x.len(), y.len()));
        }
        let md = &self.md;
        let mut acc = 0u128;
        for (a, b) in x.iter().zip(y) {
            for (&u, &v) in a.0.iter().zip(&b.0) {
                acc = md.add(acc, md.mul(u, v));
            }
        }
        Ok(acc)
    }

    pub fn norms(&self, p: &Poly) -> Norms {
        self.norms_vec(std::slice::from_ref(p))
    }

    pub fn norms_vec(&self, v: &[Poly]) -> Norms {
        let mut n = Norms { inf: 0, l1: 0, l2_sq: 0 };
        for p in v {
            for &c in &p.0 {
                let a = self.md.centered(c).unsigned_abs();
                n.inf = n.inf.max(a);
                n.l1 = n.l1.saturating_add(a);
                let sq = if a >= 1 << 63 { u128::MAX } else { a * a };
                n.l2_sq = n.l2_sq.saturating_add(sq);
            }
        }
        n
    }

    /// Squared l2 norm of centered coefficients (saturating).
    pub fn norm_sq(&self, v: &[Poly]) -> u128 {
        self.norms_vec(v).l2_sq
    }

    pub fn norm_inf(&self, v: &[Poly]) -> u128 {
        self.norms_vec(v).inf
    }

    /// True iff every NTT slot is nonzero; slots are fields, so this is exact.
    pub fn is_invertible(&self, p: &Poly) -> bool {
        let n = self.ntt(p);
        n.0.chunks(self.m).all(|s| s.iter().any(|&x| x != 0))
    }

    pub fn inverse(&self, p: &Poly) -> Result<Poly, RingError> {
        let n = self.ntt(p);
        let mut out = vec![0u128; self.d];
        for b in 0..self.l {
            let slot = &n.0[b * self.m..(b + 1) * self.m];
            let inv = self.slot_inverse(slot, self.slot_root[b]).ok_or(RingError::NotInvertible)?;
            out[b * self.m..(b + 1) * self.m].copy_from_slice(&inv);
        }
        Ok(self.intt(&NttPoly(out)))
    }

    /// Inverse in `F_q[X]/(X^m - root)` by solving the multiplication matrix.
    fn slot_inverse(&self, a: &[u128], root: u128) -> Option<Vec<u128>> {
        let md = &self.md;
        let m = a.len();
        // column k of M is a * X^k reduced
        let mut mat = vec![vec![0u128; m + 1]; m];
        let mut col = a.to_vec();
        for k in 0..m {
            for i in 0..m {
                mat[i][k] = col[i];
            }
            // multiply col by X
            let top = col[m - 1];
            for i in (1..m).rev() {
                col[i] = col[i - 1];
            }
            col[0] = md.mul(top, root);
        }
        mat[0][m] = 1;
        for c in 0..m {
            let piv = (c..m).find(|&r| mat[r][c] != 0)?;
            mat.swap(c, piv);
            let inv = md.inv(mat[c][c]);
            for x in mat[c].iter_mut() {
                *x = md.mul(*x, inv);
            }
            for r in 0..m {
                if r != c && mat[r][c] != 0 {
                    let f = mat[r][c];
                    for k in 0..=m {
                        let t = md.mul(f, mat[c][k]);
                        mat[r][k] = md.sub(mat[r][k], t);
                    }
                }
            }
        }
        Some(mat.iter().map(|row| row[m]).collect())
    }

    /// Multiplies by a polynomial with small centered coefficients directly.
    pub fn mul_small(&self, c: &[i64], p: &Poly) -> Poly {
        let md = &self.md;
        let d = self.d;
        let mut out = vec![0u128; d];
        for (i, &ci) in c.iter().enumerate() {
            if ci == 0 {
                continue;
            }
            let f = md.from_i64(ci);
            for j in 0..d {
                let t = if ci == 1 {
                    p.0[j]
                } else if ci == -1 {
                    md.neg(p.0[j])
                } else {
                    md.mul(f, p.0[j])
                };
                let k = i + j;
                if k < d {
                    out[k] = md.add(out[k], t);
                } else {
                    out[k - d] = md.sub(out[k - d], t);
                }
            }
        }
        Poly(out)
    }
}

/// Finds a primitive `2l`-th root of unity: `x^((q-1)/2l)` with order exactly `2l`.
fn find_root(md: &Modulus, l: usize) -> Option<u128> {
    let q = md.q();
    let e = (q - 1) / (2 * l as u128);
    for g in 2u128..10_000 {
        let z = md.pow(g, e);
        if md.pow(z, l as u128) == q - 1 {
            return Some(z);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    // 2^61-ish prime with q = 65 mod 128 (l = 32)
    fn desk_ring() -> Ring {
        let q = crate::params::search_prime_below(1u128 << 62, 32).unwrap();
        Ring::new(q, 64, 32).unwrap()
    }

    fn rand_poly(r: &Ring, rng: &mut ChaCha20Rng) -> Poly {
        Poly((0..r.d).map(|_| rng.random_range(0..r.q())).collect())
    }

    #[test]
    fn constant_has_equal_slots() {
        let r = desk_ring();
        let s = r.ntt_slots(&r.constant(7));
        for slot in &s.slots {
            assert_eq!(slot[0], 7);
            assert!(slot[1..].iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn ntt_roundtrip_and_schoolbook() {
        let r = desk_ring();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..50 {
            let a = rand_poly(&r, &mut rng);
            let b = rand_poly(&r, &mut rng);
            assert_eq!(r.intt(&r.ntt(&a)), a);
            assert_eq!(r.mul(&a, &b), r.mul_schoolbook(&a, &b));
        }
    }

    #[test]
    fn slots_are_residues() {
        // slot j must equal p mod (X^m - zeta^{2j+1}), checked by direct reduction
        let r = desk_ring();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let p = rand_poly(&r, &mut rng);
        let s = r.ntt_slots(&p);
        for j in 0..r.l {
            let root = r.md.pow(r.zeta(), r.slot_exponent(j) as u128);
            let mut red = vec![0u128; r.m];
            // X^{km + i} = root^k X^i
            for (idx, &c) in p.0.iter().enumerate() {
                let (k, i) = (idx / r.m, idx % r.m);
                red[i] = r.md.add(red[i], r.md.mul(c, r.md.pow(root, k as u128)));
            }
            assert_eq!(s.slots[j], red);
        }
        assert_eq!(r.from_slots(&s), p);
    }

    #[test]
    fn monomial_square_is_minus_one() {
        let r = desk_ring();
        let x = r.monomial(r.d / 2);
        assert_eq!(r.mul(&x, &x), r.constant(r.q() - 1));
        assert_eq!(r.mul(&x, &r.one()), x);
    }

    #[test]
    fn automorphism_rules() {
        let r = desk_ring();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let p = rand_poly(&r, &mut rng);
        let q = rand_poly(&r, &mut rng);
        assert_eq!(r.automorphism(&p, 1).unwrap(), p);
        assert_eq!(r.sigma_m1(&r.sigma_m1(&p)), p);
        assert_eq!(r.automorphism(&p, -1).unwrap(), r.sigma_m1(&p));
        let x = r.monomial(1);
        assert_eq!(r.sigma_m1(&x), r.monomial(2 * r.d - 1));
        assert!(r.automorphism(&p, 4).is_err());
        let (i, j) = (3i64, 5i64);
        let lhs = r.automorphism(&r.automorphism(&p, j).unwrap(), i).unwrap();
        assert_eq!(lhs, r.automorphism(&p, i * j).unwrap());
        let prod = r.automorphism(&r.mul(&p, &q), 7).unwrap();
        let sep = r.mul(&r.automorphism(&p, 7).unwrap(), &r.automorphism(&q, 7).unwrap());
        assert_eq!(prod, sep);
    }

    #[test]
    fn const_coeff_lemma() {
        let r = desk_ring();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let x: Vec<Poly> = (0..3).map(|_| rand_poly(&r, &mut rng)).collect();
        let y: Vec<Poly> = (0..3).map(|_| rand_poly(&r, &mut rng)).collect();
        let mut acc = r.zero();
        for (a, b) in x.iter().zip(&y) {
            acc = r.add(&acc, &r.mul(&r.sigma_m1(a), b));
        }
        assert_eq!(acc.0[0], r.const_coeff_inner(&x, &y).unwrap());
        assert!(r.const_coeff_inner(&x, &y[..2]).is_err());
        let e1 = vec![r.one()];
        assert_eq!(r.const_coeff_inner(&e1, &e1).unwrap(), 1);
    }

    #[test]
    fn ntt_average_truncates() {
        let r = desk_ring();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let p = rand_poly(&r, &mut rng);
        assert_eq!(r.ntt_average(&p), p.0[..r.m].to_vec());
        assert_eq!(r.ntt_average(&r.zero()), vec![0; r.m]);
    }

    #[test]
    fn invertibility() {
        let r = desk_ring();
        assert!(r.is_invertible(&r.one()));
        // X^m - zeta^{2j+1} vanishes in slot j
        let root = r.md.pow(r.zeta(), 1);
        let mut p = r.monomial(r.m);
        p.0[0] = r.md.neg(root);
        assert!(!r.is_invertible(&p));
        assert!(r.inverse(&p).is_err());
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let a = rand_poly(&r, &mut rng);
        let ai = r.inverse(&a).unwrap();
        assert_eq!(r.mul(&a, &ai), r.one());
    }

    #[test]
    fn norms_centered() {
        let r = desk_ring();
        let n = r.norms(&r.constant(r.q() - 1));
        assert_eq!((n.inf, n.l1, n.l2_sq), (1, 1, 1));
        let z = r.norms(&r.zero());
        assert_eq!((z.inf, z.l1, z.l2_sq), (0, 0, 0));
    }

    #[test]
    fn small_mul_matches() {
        let r = desk_ring();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let p = rand_poly(&r, &mut rng);
        let c: Vec<i64> = (0..r.d).map(|_| rng.random_range(-1..=1)).collect();
        assert_eq!(r.mul_small(&c, &p), r.mul(&r.from_i64s(&c), &p));
    }
}

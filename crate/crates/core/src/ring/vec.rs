//! Matrices and vectors over `R_q`. Matrices are held in the NTT domain so a
//! product costs one forward transform per input and one inverse per output.

use super::{NttPoly, Poly, Ring};

/// A vector already transformed into the NTT domain.
#[derive(Clone, Debug)]
pub struct NttVec(pub Vec<NttPoly>);

impl NttVec {
    pub fn from_polys(ring: &Ring, v: &[Poly]) -> Self {
        NttVec(v.iter().map(|p| ring.ntt(p)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self^T v` as a single ring element.
    pub fn dot(&self, ring: &Ring, v: &NttVec) -> Poly {
        assert_eq!(self.len(), v.len(), "dot product length mismatch");
        let mut acc = vec![0u128; ring.d];
        for (a, b) in self.0.iter().zip(&v.0) {
            ring.ntt_mul_acc(&mut acc, a, b);
        }
        ring.intt(&NttPoly(acc))
    }

    pub fn dot_polys(&self, ring: &Ring, v: &[Poly]) -> Poly {
        self.dot(ring, &NttVec::from_polys(ring, v))
    }
}

/// Row-major `rows x cols` matrix over `R_q` in the NTT domain.
#[derive(Clone, Debug)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<NttPoly>,
}

impl Mat {
    pub fn from_polys(ring: &Ring, rows: usize, cols: usize, polys: &[Poly]) -> Self {
        assert_eq!(polys.len(), rows * cols);
        Mat { rows, cols, data: polys.iter().map(|p| ring.ntt(p)).collect() }
    }

    pub fn entry(&self, i: usize, j: usize) -> &NttPoly {
        &self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> NttVec {
        NttVec(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    /// `M v` for `v` of length `cols`.
    pub fn mul_vec(&self, ring: &Ring, v: &[Poly]) -> Vec<Poly> {
        self.mul_ntt(ring, &NttVec::from_polys(ring, v))
    }

    pub fn mul_ntt(&self, ring: &Ring, v: &NttVec) -> Vec<Poly> {
        assert_eq!(v.len(), self.cols, "matrix-vector length mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = vec![0u128; ring.d];
                for j in 0..self.cols {
                    ring.ntt_mul_acc(&mut acc, self.entry(i, j), &v.0[j]);
                }
                ring.intt(&NttPoly(acc))
            })
            .collect()
    }

    /// `M^T v` for `v` of length `rows`.
    pub fn tmul_vec(&self, ring: &Ring, v: &[Poly]) -> Vec<Poly> {
        assert_eq!(v.len(), self.rows, "transpose product length mismatch");
        let vn = NttVec::from_polys(ring, v);
        (0..self.cols)
            .map(|j| {
                let mut acc = vec![0u128; ring.d];
                for i in 0..self.rows {
                    ring.ntt_mul_acc(&mut acc, self.entry(i, j), &vn.0[i]);
                }
                ring.intt(&NttPoly(acc))
            })
            .collect()
    }
}

pub fn vec_add(ring: &Ring, a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| ring.add(x, y)).collect()
}

pub fn vec_sub(ring: &Ring, a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| ring.sub(x, y)).collect()
}

/// `c * v` for a ring element `c`.
pub fn vec_scale(ring: &Ring, c: &Poly, v: &[Poly]) -> Vec<Poly> {
    let cn = ring.ntt(c);
    v.iter().map(|p| ring.intt(&ring.ntt_mul(&cn, &ring.ntt(p)))).collect()
}

/// `sum_i a_i b_i`.
pub fn vec_dot(ring: &Ring, a: &[Poly], b: &[Poly]) -> Poly {
    assert_eq!(a.len(), b.len());
    let mut acc = vec![0u128; ring.d];
    for (x, y) in a.iter().zip(b) {
        ring.ntt_mul_acc(&mut acc, &ring.ntt(x), &ring.ntt(y));
    }
    ring.intt(&NttPoly(acc))
}

/// Flattens polynomial coefficients into centered integers.
pub fn flatten_centered(ring: &Ring, v: &[Poly]) -> Vec<i128> {
    v.iter().flat_map(|p| ring.centered(p)).collect()
}

/// Packs integers (length a multiple of `d`) into polynomials.
pub fn pack_ints(ring: &Ring, x: &[i128]) -> Vec<Poly> {
    assert_eq!(x.len() % ring.d, 0);
    x.chunks(ring.d)
        .map(|c| Poly(c.iter().map(|&v| ring.md.from_i128(v)).collect()))
        .collect()
}

/// Packs residues mod `q` (length a multiple of `d`) into polynomials.
pub fn pack_residues(ring: &Ring, x: &[u128]) -> Vec<Poly> {
    assert_eq!(x.len() % ring.d, 0);
    x.chunks(ring.d).map(|c| Poly(c.to_vec())).collect()
}

/// `sigma_{-1}` applied element-wise.
pub fn vec_sigma_m1(ring: &Ring, v: &[Poly]) -> Vec<Poly> {
    v.iter().map(|p| ring.sigma_m1(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn matrix_products_agree_with_schoolbook() {
        let q = crate::params::search_prime_below(1u128 << 62, 32).unwrap();
        let r = Ring::new(q, 64, 32).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let mut rp = || Poly((0..r.d).map(|_| rng.random_range(0..q)).collect());
        let polys: Vec<Poly> = (0..6).map(|_| rp()).collect();
        let v: Vec<Poly> = (0..3).map(|_| rp()).collect();
        let w: Vec<Poly> = (0..2).map(|_| rp()).collect();
        let m = Mat::from_polys(&r, 2, 3, &polys);
        let mv = m.mul_vec(&r, &v);
        for i in 0..2 {
            let mut acc = r.zero();
            for j in 0..3 {
                acc = r.add(&acc, &r.mul_schoolbook(&polys[i * 3 + j], &v[j]));
            }
            assert_eq!(mv[i], acc);
        }
        let tv = m.tmul_vec(&r, &w);
        for j in 0..3 {
            let mut acc = r.zero();
            for i in 0..2 {
                acc = r.add(&acc, &r.mul_schoolbook(&polys[i * 3 + j], &w[i]));
            }
            assert_eq!(tv[j], acc);
        }
        assert_eq!(m.row(1).dot_polys(&r, &v), mv[1]);
        assert_eq!(vec_dot(&r, &polys[..3], &v), mv[0]);
    }
}

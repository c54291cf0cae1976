//! Canonical byte encodings shared by the transcript, proofs and the ledger file.
//!
//! Ring elements are `d` little-endian residues of `ceil(log2 q / 8)` bytes.
//! Short vectors (masked responses) are centered `i64` values. Every decoder
//! rejects non-canonical input so each byte string has at most one meaning.

use thiserror::Error;

use crate::ring::{Poly, Ring};

/// Upper bound on any decoded element count; keeps hostile lengths from
/// triggering large allocations.
const MAX_ITEMS: usize = 1 << 22;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WireError {
    #[error("unexpected end of input at byte {0}")]
    Eof(usize),
    #[error("{0} trailing bytes")]
    Trailing(usize),
    #[error("non-canonical {0} at byte {1}")]
    NonCanonical(&'static str, usize),
    #[error("unexpected {what}: got {got}, want {want}")]
    Unexpected { what: &'static str, got: u64, want: u64 },
    #[error("length {0} exceeds limit")]
    TooLong(u64),
}

pub fn put_u8(out: &mut Vec<u8>, x: u8) {
    out.push(x);
}

pub fn put_u32(out: &mut Vec<u8>, x: u32) {
    out.extend_from_slice(&x.to_le_bytes());
}

pub fn put_u64(out: &mut Vec<u8>, x: u64) {
    out.extend_from_slice(&x.to_le_bytes());
}

pub fn put_bytes(out: &mut Vec<u8>, b: &[u8]) {
    put_u32(out, b.len() as u32);
    out.extend_from_slice(b);
}

/// Fixed-width residues without a length prefix.
pub fn put_poly_raw(out: &mut Vec<u8>, ring: &Ring, p: &Poly) {
    let w = ring.md.byte_len();
    for &c in &p.0 {
        out.extend_from_slice(&c.to_le_bytes()[..w]);
    }
}

pub fn put_poly(out: &mut Vec<u8>, ring: &Ring, p: &Poly) {
    put_poly_raw(out, ring, p);
}

pub fn put_polys(out: &mut Vec<u8>, ring: &Ring, v: &[Poly]) {
    put_u32(out, v.len() as u32);
    for p in v {
        put_poly_raw(out, ring, p);
    }
}

/// Short polynomials as centered `i64` coefficients.
pub fn put_short_polys(out: &mut Vec<u8>, ring: &Ring, v: &[Poly]) {
    put_u32(out, v.len() as u32);
    for p in v {
        for &c in &p.0 {
            let x = ring.md.centered(c);
            let x = i64::try_from(x).unwrap_or(if x < 0 { i64::MIN } else { i64::MAX });
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
}

pub fn put_ints(out: &mut Vec<u8>, v: &[i64]) {
    put_u32(out, v.len() as u32);
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.remaining() < n {
            return Err(WireError::Eof(self.pos));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, WireError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn array32(&mut self) -> Result<[u8; 32], WireError> {
        Ok(self.take(32)?.try_into().unwrap())
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], WireError> {
        let n = self.u32()? as usize;
        self.take(n)
    }

    pub fn expect_u8(&mut self, what: &'static str, want: u8) -> Result<(), WireError> {
        let got = self.u8()?;
        if got != want {
            return Err(WireError::Unexpected { what, got: got as u64, want: want as u64 });
        }
        Ok(())
    }

    fn count(&mut self, want: Option<usize>, what: &'static str) -> Result<usize, WireError> {
        let n = self.u32()? as usize;
        if n > MAX_ITEMS {
            return Err(WireError::TooLong(n as u64));
        }
        if let Some(w) = want {
            if n != w {
                return Err(WireError::Unexpected { what, got: n as u64, want: w as u64 });
            }
        }
        Ok(n)
    }

    pub fn poly(&mut self, ring: &Ring) -> Result<Poly, WireError> {
        let w = ring.md.byte_len();
        let mut out = Vec::with_capacity(ring.d);
        for _ in 0..ring.d {
            let at = self.pos;
            let b = self.take(w)?;
            let mut le = [0u8; 16];
            le[..w].copy_from_slice(b);
            let c = u128::from_le_bytes(le);
            if c >= ring.q() {
                return Err(WireError::NonCanonical("residue", at));
            }
            out.push(c);
        }
        Ok(Poly(out))
    }

    /// Length-prefixed polynomial vector; `want` pins the expected length.
    pub fn polys(&mut self, ring: &Ring, want: Option<usize>) -> Result<Vec<Poly>, WireError> {
        let n = self.count(want, "vector length")?;
        (0..n).map(|_| self.poly(ring)).collect()
    }

    pub fn short_polys(&mut self, ring: &Ring, want: Option<usize>) -> Result<Vec<Poly>, WireError> {
        let n = self.count(want, "vector length")?;
        let half = ((ring.q() - 1) / 2) as i128;
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            let mut p = Vec::with_capacity(ring.d);
            for _ in 0..ring.d {
                let at = self.pos;
                let x = i64::from_le_bytes(self.take(8)?.try_into().unwrap());
                if (x as i128).abs() > half {
                    return Err(WireError::NonCanonical("centered coefficient", at));
                }
                p.push(ring.md.from_i64(x));
            }
            v.push(Poly(p));
        }
        Ok(v)
    }

    pub fn ints(&mut self, want: Option<usize>) -> Result<Vec<i64>, WireError> {
        let n = self.count(want, "integer vector length")?;
        (0..n).map(|_| Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))).collect()
    }

    pub fn finish(&self) -> Result<(), WireError> {
        match self.remaining() {
            0 => Ok(()),
            n => Err(WireError::Trailing(n)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> Ring {
        let q = crate::params::search_prime_below(1u128 << 62, 32).unwrap();
        Ring::new(q, 64, 32).unwrap()
    }

    #[test]
    fn poly_roundtrip_and_canonical() {
        let r = ring();
        let p = r.from_i64s(&(0..64).map(|i| i - 32).collect::<Vec<_>>());
        let mut buf = Vec::new();
        put_polys(&mut buf, &r, std::slice::from_ref(&p));
        put_short_polys(&mut buf, &r, std::slice::from_ref(&p));
        let mut rd = Reader::new(&buf);
        assert_eq!(rd.polys(&r, Some(1)).unwrap(), vec![p.clone()]);
        assert_eq!(rd.short_polys(&r, Some(1)).unwrap(), vec![p]);
        rd.finish().unwrap();

        let mut bad = Vec::new();
        put_u32(&mut bad, 1);
        bad.extend(std::iter::repeat_n(0xff, 64 * r.md.byte_len()));
        assert!(matches!(
            Reader::new(&bad).polys(&r, None),
            Err(WireError::NonCanonical(_, _))
        ));
    }

    #[test]
    fn truncated_and_trailing() {
        let mut buf = Vec::new();
        put_ints(&mut buf, &[1, -2, 3]);
        assert!(Reader::new(&buf[..buf.len() - 1]).ints(None).is_err());
        buf.push(0);
        let mut rd = Reader::new(&buf);
        assert_eq!(rd.ints(Some(3)).unwrap(), vec![1, -2, 3]);
        assert_eq!(rd.finish(), Err(WireError::Trailing(1)));
    }
}

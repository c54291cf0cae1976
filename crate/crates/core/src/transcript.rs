//! Fiat–Shamir transcript over SHAKE256.
//!
//! Every absorb is framed as `label_len || label || data_len || data`, so no
//! two distinct absorb sequences collide. A challenge is squeezed from a clone
//! of the running state and then absorbed back, which binds every later
//! challenge to every earlier one.

use rand_chacha::ChaCha20Rng;
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

use crate::ring::{Poly, Ring};
use crate::sampling::rng_from_seed;

const DOMAIN: &[u8] = b"pqetl/fs/v1";

#[derive(Clone)]
pub struct Transcript {
    h: Shake256,
}

impl Transcript {
    pub fn new(protocol: &str) -> Self {
        let mut t = Transcript { h: Shake256::default() };
        t.absorb("domain", DOMAIN);
        t.absorb("protocol", protocol.as_bytes());
        t
    }

    pub fn absorb(&mut self, label: &str, data: &[u8]) {
        self.h.update(&(label.len() as u64).to_le_bytes());
        self.h.update(label.as_bytes());
        self.h.update(&(data.len() as u64).to_le_bytes());
        self.h.update(data);
    }

    pub fn absorb_u64(&mut self, label: &str, x: u64) {
        self.absorb(label, &x.to_le_bytes());
    }

    pub fn absorb_polys(&mut self, label: &str, ring: &Ring, v: &[Poly]) {
        let mut buf = Vec::with_capacity(v.len() * ring.d * ring.md.byte_len());
        for p in v {
            crate::wire::put_poly_raw(&mut buf, ring, p);
        }
        self.absorb(label, &buf);
    }

    pub fn absorb_ints(&mut self, label: &str, v: &[i128]) {
        let mut buf = Vec::with_capacity(v.len() * 16);
        for x in v {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        self.absorb(label, &buf);
    }

    /// Squeezes a 32-byte challenge seed and absorbs it.
    pub fn challenge_seed(&mut self, label: &str) -> [u8; 32] {
        let mut h = self.h.clone();
        h.update(b"challenge");
        h.update(label.as_bytes());
        let mut out = [0u8; 32];
        h.finalize_xof().read(&mut out);
        self.absorb(label, &out);
        out
    }

    pub fn challenge_rng(&mut self, label: &str) -> ChaCha20Rng {
        rng_from_seed(self.challenge_seed(label))
    }
}

/// Hash of arbitrary bytes to 32 bytes under a label.
pub fn digest(label: &str, data: &[u8]) -> [u8; 32] {
    let mut t = Transcript::new(label);
    t.absorb("data", data);
    t.challenge_seed("digest")
}

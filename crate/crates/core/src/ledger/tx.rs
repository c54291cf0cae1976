//! Transaction rows and their byte encoding.
//!
//! ```text
//! tx   = u32 lanes, lane*
//! lane = bytes(PoB), u32 cells, cell*
//! cell = com, com', bytes(PoC), bytes(PoC'), bytes(range), bytes(OR)
//! ```
//! `bytes(x)` is a u32 length followed by `x`; every proof carries its own
//! kind and version header.

use thiserror::Error;

use crate::commit::{Commitment, PublicParams};
use crate::wire::{self, Reader, WireError};
use crate::zkp::or::OrProof;
use crate::zkp::poa::PoaProof;
use crate::zkp::poa_compact::PoaCompactProof;
use crate::zkp::pob::PobProof;
use crate::zkp::poc::PocProof;
use crate::zkp::{ProofError, ProofKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RangeProof {
    Standard(PoaProof),
    Compact(PoaCompactProof),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub com: Commitment,
    pub com2: Commitment,
    pub poc: PocProof,
    pub poc2: PocProof,
    pub range: RangeProof,
    pub or: OrProof,
}

/// One asset lane of a transaction row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lane {
    pub pob: PobProof,
    pub cells: Vec<Cell>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transaction {
    pub lanes: Vec<Lane>,
}

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error(transparent)]
    Proof(#[from] ProofError),
}

/// Upper bound on lanes or cells accepted by the decoder.
const MAX_COUNT: u32 = 1 << 16;

impl Transaction {
    pub fn encode(&self, pp: &PublicParams) -> Vec<u8> {
        let ring = &pp.ring;
        let mut out = Vec::new();
        wire::put_u32(&mut out, self.lanes.len() as u32);
        for l in &self.lanes {
            wire::put_bytes(&mut out, &l.pob.encode(pp));
            wire::put_u32(&mut out, l.cells.len() as u32);
            for c in &l.cells {
                c.com.write(&mut out, ring);
                c.com2.write(&mut out, ring);
                wire::put_bytes(&mut out, &c.poc.encode(pp));
                wire::put_bytes(&mut out, &c.poc2.encode(pp));
                let range = match &c.range {
                    RangeProof::Standard(p) => p.encode(pp),
                    RangeProof::Compact(p) => p.encode(pp),
                };
                wire::put_bytes(&mut out, &range);
                wire::put_bytes(&mut out, &c.or.encode(pp));
            }
        }
        out
    }

    pub fn decode(pp: &PublicParams, bytes: &[u8]) -> Result<Self, DecodeError> {
        let (ring, kappa) = (&pp.ring, pp.params.kappa);
        let mut r = Reader::new(bytes);
        let count = |r: &mut Reader| -> Result<usize, WireError> {
            let n = r.u32()?;
            if n > MAX_COUNT {
                return Err(WireError::TooLong(n as u64));
            }
            Ok(n as usize)
        };
        let lanes_n = count(&mut r)?;
        let mut lanes = Vec::with_capacity(lanes_n);
        for _ in 0..lanes_n {
            let pob = PobProof::decode(pp, r.bytes()?)?;
            let cells_n = count(&mut r)?;
            let mut cells = Vec::with_capacity(cells_n);
            for _ in 0..cells_n {
                let com = Commitment::read(&mut r, ring, kappa)?;
                let com2 = Commitment::read(&mut r, ring, kappa)?;
                let poc = PocProof::decode(pp, r.bytes()?)?;
                let poc2 = PocProof::decode(pp, r.bytes()?)?;
                let rb = r.bytes()?;
                let range = if rb.first() == Some(&(ProofKind::PoAc as u8)) {
                    RangeProof::Compact(PoaCompactProof::decode(pp, rb)?)
                } else {
                    RangeProof::Standard(PoaProof::decode(pp, rb)?)
                };
                let or = OrProof::decode(pp, r.bytes()?)?;
                cells.push(Cell { com, com2, poc, poc2, range, or });
            }
            lanes.push(Lane { pob, cells });
        }
        r.finish()?;
        Ok(Transaction { lanes })
    }
}

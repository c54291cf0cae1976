//! Post-quantum confidential multi-asset ledger.
//!
//! Transaction amounts live in an encrypted table of lattice commitments
//! indexed by (transaction, asset, participant). Each row carries
//! zero-knowledge proofs that amounts balance, that commitments are well
//! formed and extractable by their owner, that spent balances stay
//! non-negative, and that re-commitments hold the same value.

// Index loops mirror the matrix and coefficient formulas directly.
#![allow(clippy::needless_range_loop)]

pub mod params;
pub mod ring;
pub mod sampling;
pub mod transcript;
pub mod wire;
pub mod commit;
pub mod zkp;
pub mod ledger;
pub mod cli;

//! Sigma protocols behind every transaction, made non-interactive with a
//! SHAKE256 transcript.
//!
//! | kind | proves |
//! |------|--------|
//! | PoB  | a column of commitments sums to zero |
//! | PoC  | a transaction commitment is well formed with short randomness |
//! | PoE  | two commitments hold the same value, using the owner's secret key |
//! | PoKW | a public key is well formed |
//! | PoA  | a committed value lies in `[0, 2^value_bits)` |
//! | PoA' | every coefficient of a compact commitment lies in `[0, 2^beta)` |
//! | PoE2 | two BDLOP commitments hold the same message |
//! | OR   | PoE or PoE2, without revealing which |
//!
//! Every proof restarts from fresh masks when rejection sampling aborts, so
//! the transcript never contains a rejected response.

pub mod common;
pub mod eq;
pub mod instance;
pub mod or;
pub mod poa;
pub mod poa_compact;
pub mod pob;
pub mod poc;
pub mod poe2;

pub use common::{Fault, ProofError, ProofKind, ProveOptions};

//! Core algorithms for permute-then-compress experiments.
//!
//! The library implements the two fixed-key secrecy systems that the
//! companion CLI drives end to end:
//!
//! * a *reversed* system that first encrypts an i.i.d. source block with a
//!   permutation cipher (positions are shuffled, the empirical type is
//!   preserved) and then compresses the ciphertext with a rate-distortion
//!   codebook, and
//! * a *conventional* system that first compresses and then encrypts the
//!   compressed index with a modulo-sum one-time key.
//!
//! Around those sit the measurement tools: exact per-type-class information
//! leakage by exhaustive enumeration, the small-set/eta bookkeeping behind
//! the leakage upper bound `T1 + T2 + T3`, a Blahut-Arimoto rate-distortion
//! solver with random-codebook construction, and seeded Monte Carlo
//! estimators for the concentration behaviour of permutation ensembles.
//!
//! Everything here is deterministic given a seed: randomness flows only
//! through [`rng`] streams derived from a master seed plus a role tag, and
//! all transcendental math goes through `libm` so results are bit-stable
//! across platforms. Information quantities are carried in nats (see
//! [`model::InfoValue`]); reports convert to bits at the edge.
//!
//! The crate is `no_std` (with `alloc`): all IO, serialization and CLI
//! plumbing lives in the companion crate. Every public type is immutable
//! after construction, so values are freely shareable across threads.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cipher;
pub mod concentration;
pub mod error;
pub mod leakage;
pub mod math;
pub mod model;
pub mod rd;
pub mod rng;
pub mod typeclass;

pub use error::{Error, Result};

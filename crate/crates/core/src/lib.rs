//! Kernels for the generalised birthday problem over `Z_M`.
//!
//! Given an `L x N` matrix of residues, the crate counts the index vectors
//! whose selected entries sum to zero (the exhaustive side), counts the
//! vectors that survive Wagner's binary-tree merge with a shrinking
//! symmetric window (the Wagner side), evaluates the exact level
//! probabilities of that merge, the limit polynomials of the ratio of the two
//! means, and the Chen-Stein style Poisson bounds for both counts.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! the thread-parallel Monte Carlo driver live in the `gbirthday` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod exhaustive;
pub mod instance;
pub mod limitpoly;
pub mod recursion;
pub mod ring;
pub mod stats;
pub mod wagner;

pub use error::{Error, Result};
pub use instance::Instance;
pub use ring::{Residue, RingContext};

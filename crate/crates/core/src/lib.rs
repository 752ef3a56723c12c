//! Uplink LDPC-coded SCMA link simulation.
//!
//! The crate is organised along the receive chain:
//!
//! * [`codebook`] holds the per-user sparse codebooks and the factor graph
//!   they induce between users and resources.
//! * [`channel`] superimposes user codewords through AWGN or i.i.d. Rayleigh
//!   gains.
//! * [`detector`] runs message passing multiuser detection in the probability
//!   and log domains, plus an exhaustive MAP oracle for small instances.
//! * [`ldpc`] loads alist parity-check matrices, encodes systematically and
//!   decodes with flooding belief propagation.
//! * [`bridge`] converts between symbol and bit LLRs, extracts intrinsic
//!   information and interleaves per user.
//! * [`receiver`] schedules detector and decoder stages into inner and outer
//!   iterations.
//! * [`sim`] is the Monte Carlo BER harness, operation accounting and result
//!   emission.
//! * [`checks`] compares the detector and bridge with brute-force references.
//!
//! All bit LLRs follow `L = ln(p(b = 0) / p(b = 1))`. Symbol LLRs are relative
//! to the codeword labelled with all-zero bits, whose entry is always `0`.

pub mod bridge;
pub mod channel;
pub mod checks;
pub mod codebook;
pub mod detector;
pub mod error;
pub mod ldpc;
pub mod logsum;
pub mod ops;
pub mod receiver;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};

//! Secure seed-based watermarking with nested one-dimensional lattices.
//!
//! The crate is `no_std` and only needs an allocator. It covers the whole
//! analytic and Monte Carlo toolchain for the scheme:
//!
//! * [`numerics`]: Gaussian special functions, adaptive quadrature,
//!   truncated-normal sampling, symmetric eigensolvers and reproducible
//!   random streams.
//! * [`lattice`]: the alternating lattice decision, cell geometry, the
//!   watermark sampler and the closed-form embedding moments.
//! * [`keying`]: secret carrier derivation, latent embedding and decoding.
//! * [`channel`]: the AWGN/BSC channel characteristic, capacity and the
//!   measured noise presets.
//! * [`codes`]: repetition coding and Shannon-rate bookkeeping.
//! * [`security`]: Marchenko-Pastur baselines, the PCA key-recovery attack
//!   and spoofing trials.
//! * [`characterize`]: fidelity, characteristic surfaces and
//!   theory-versus-simulation validation.
//! * [`scenario`]: the multi-user attribution simulation.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channel;
pub mod characterize;
pub mod codes;
mod error;
pub mod keying;
pub mod lattice;
pub mod numerics;
pub mod scenario;
pub mod security;

pub use error::{Error, Result};
pub use keying::{CarrierMatrix, LatentVector, SecretKey};
pub use lattice::{LatticeParams, WatermarkVector};

pub use numerics::RngStream;

/// A bit vector; every entry is 0 or 1.
pub type Bits = alloc::vec::Vec<u8>;

//! # csiloc
//!
//! Indoor localization from massive-MIMO channel state information (CSI).
//!
//! A base station with an M-antenna uniform linear array observes, for each
//! uplink user, an M×K complex channel matrix over K OFDM subcarriers. That
//! matrix is a position fingerprint: a neural network can regress the user's
//! xy coordinates from it to centimeter accuracy. The catch is environmental
//! change — a person walking between user and array attenuates a subset of
//! antennas and wrecks a model trained only on the static environment.
//!
//! This crate provides the full experimental pipeline:
//!
//! - [`geometry`] / [`dataset`] / [`container`]: array geometry, in-memory
//!   datasets, normalization, splits, and the CSID binary container.
//! - [`sim`]: a deterministic geometric channel simulator — line-of-sight plus
//!   reflectors, moving cylindrical blockers, and calibrated AWGN.
//! - [`augment`]: blockage-robustness training augmentations (antenna zeroing
//!   and random attenuation).
//! - [`autodiff`]: a minimal reverse-mode autodiff engine with exactly the ops
//!   the model needs, plus Adam and finite-difference gradient checking.
//! - [`model`]: the attention-based position regression network (ADN) and its
//!   attention-free twin (DN).
//! - [`experiment`] / [`report`]: training loops, seed sweeps, the
//!   static-vs-dynamic generalization experiment, and CSV/JSON reports.
//! - [`cli`]: the `csiloc` command-line pipeline built from the above.
//!
//! Every random decision flows from explicit seeds through ChaCha8 substreams
//! ([`seed`]), so datasets, training runs, and full experiments reproduce
//! byte-identically.
//!
//! The `examples/` directory walks through each capability end to end; start
//! with `cargo run --example generate_dataset`.

pub mod augment;
pub mod autodiff;
pub mod cli;
pub mod container;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod model;
pub mod report;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};

/// Crate version string.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

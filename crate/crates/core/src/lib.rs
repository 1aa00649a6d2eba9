//! Edge-centric functional connectivity and graph classification.
//!
//! The crate turns regional activity recordings into two connectivity views
//! and classifies the resulting graphs:
//!
//! * [`signal`] z-scores recordings and expands them into edge time series,
//!   one series per unordered region pair.
//! * [`connectivity`] builds node-by-node correlation matrices and
//!   edge-by-edge cosine similarity matrices from those series.
//! * [`graph`] packages both views into a labeled graph and projects
//!   edge-space matrices back to node space through the pair incidence
//!   structure.
//! * [`model`] implements the co-embedding graph convolutional classifier
//!   (joint node and edge layers) alongside a plain GCN baseline, with
//!   reverse-mode gradients and a decoupled-weight-decay Adam trainer.
//! * [`synth`] generates community-structured synthetic cohorts with a
//!   controllable coupling level per class.
//! * [`eval`] provides stratified cross-validation and macro-averaged
//!   classification metrics.
//!
//! Everything is deterministic given explicit seeds: random state comes from
//! ChaCha8 streams derived in [`seed`], and no operation reads ambient
//! entropy, time, or thread identity.
//!
//! The crate is `no_std`-compatible (it requires `alloc`). The default `std`
//! feature enables runtime SIMD selection in the matrix kernels; disabling it
//! routes float math through `libm` instead.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod connectivity;
pub mod error;
pub mod eval;
pub mod graph;
pub mod matrix;
pub mod model;
pub mod seed;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
pub use matrix::Mat;

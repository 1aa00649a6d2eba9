//! Command-line pipeline around [`efcnet_core`]: synthetic data generation,
//! connectivity file computation, training, cross-validation, and report
//! rendering, plus the on-disk formats they share.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod graphio;
pub mod matio;
pub mod report;

pub use error::{AppError, Result};

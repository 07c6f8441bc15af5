//! Non-parametric estimation of Fisher information from samples.
//!
//! Densities are estimated on a shared grid at `theta` and `theta +- delta`,
//! then combined by centered finite differences. The step `delta` is sized
//! from the radius inside which finite-sample estimates are
//! indistinguishable.

pub mod density;
pub mod error;
pub mod experiments;
pub mod fim;
pub mod models;
pub mod samples;
pub mod seed;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

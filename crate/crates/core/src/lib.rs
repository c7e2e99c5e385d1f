//! Semi-supervised anomaly detection for blockchain supply-chain network
//! traffic.
//!
//! A deep autoencoder learns to reconstruct normal traffic while a small
//! perceptron classifier learns labeled attacks; both read the same
//! 21-feature sample and their outputs blend into one anomaly score
//! `λ · L_re + γ · y`, cut at a threshold calibrated by a decayed grid
//! search. The classifier can be retrained alone when new attacks are
//! labeled, leaving the autoencoder untouched.
//!
//! Modules:
//! - [`nn`] — dense layers, losses, backprop and Adam, all `f64`.
//! - [`model`] — the composite detector, joint training, classifier-only
//!   updates, persistence.
//! - [`threshold`] — quantile seeding and the threshold search.
//! - [`metrics`] — confusion matrix, macro metrics, cached score sets.
//! - [`data`] — record schema, CSV files, scaling, splits, synthesis.

pub mod data;
pub mod error;
pub mod metrics;
pub mod model;
pub mod nn;
mod rng;
pub mod threshold;

pub use error::{Error, Result};

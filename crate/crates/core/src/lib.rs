//! Learned robot self-collision checking.
//!
//! The crate covers the whole experimental pipeline:
//!
//! - [`geometry`]: exact mesh–mesh intersection with a BVH broad phase, the
//!   ground-truth oracle;
//! - [`robot`]: serial-arm forward kinematics and self-collision labels;
//! - [`encoding`]: the sin/cos positional encoding of joint inputs;
//! - [`nn`]: fully connected binary classifiers trained with Adam on BCE;
//! - [`baselines`]: KNN, Gaussian naive Bayes and LDA;
//! - [`dataset`]: balanced sampling, 70:20:10 splits, CSV persistence;
//! - [`eval`]: metrics, encoding-level sweeps, slice rasters, loss curves and
//!   latency benchmarks.

pub mod baselines;
pub mod dataset;
pub mod encoding;
mod error;
pub mod eval;
pub mod geometry;
pub mod nn;
pub mod robot;

pub use error::{Error, Result};

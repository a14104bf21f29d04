//! Sensitivity analysis of evolutionary-algorithm hyperparameters.
//!
//! Hyperparameter spaces are sampled with Morris, Morris-LHS or Sobol designs,
//! each sample configures CMA-ES, DE, NSGA-III or MOEA/D on a benchmark suite,
//! and the averaged performance feeds elementary-effects and variance-based
//! indices.

pub mod error;
pub mod hyperspace;
pub mod analysis;
pub mod indices;
pub mod metrics;
pub mod moo;
pub mod problems;
pub mod runner;
pub mod sampling;
pub mod seed;
pub mod soo;
pub mod util;

pub use error::{Error, Result};

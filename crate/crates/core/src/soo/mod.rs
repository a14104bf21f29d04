//! Single-objective optimizers run to a fixed evaluation budget.

mod cmaes;
mod de;

use serde::{Deserialize, Serialize};

pub use cmaes::{run_cmaes, CmaesConfig, CmaesConstants};
pub use de::{de_donor, run_de, BaseType, Crossover, DeConfig};

use crate::error::{Error, Result};

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub best_value: f64,
    pub best_point: Vec<f64>,
    pub evals_used: usize,
    /// Best-so-far value after each generation (initialization included).
    pub history: Vec<f64>,
    /// Set when the run hit a numerical failure it could not repair.
    pub failed: bool,
    /// Number of covariance repairs performed (CMA-ES only).
    pub repairs: usize,
    /// Number of generated points that had to be clamped into the box.
    pub clamped: usize,
}

pub(crate) fn check_budget(budget: usize, lambda: usize) -> Result<()> {
    if budget < lambda {
        return Err(Error::Config(format!("budget {budget} is smaller than lambda {lambda}")));
    }
    Ok(())
}

pub(crate) fn check_range(name: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo..=hi).contains(&v) {
        return Err(Error::Config(format!("{name} = {v} outside [{lo}, {hi}]")));
    }
    Ok(())
}

/// Tracks the best point seen so far.
#[derive(Debug)]
pub(crate) struct Incumbent {
    pub value: f64,
    pub point: Vec<f64>,
}

impl Incumbent {
    pub fn new(n: usize) -> Self {
        Self { value: f64::INFINITY, point: vec![f64::NAN; n] }
    }

    pub fn offer(&mut self, x: &[f64], v: f64) {
        if v < self.value {
            self.value = v;
            self.point.copy_from_slice(x);
        }
    }
}

//! Declarative experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperspace::{HyperSpace, ParamSpec, UnitPoint};
use crate::indices::SobolEstimator;
use crate::metrics::Metric;
use crate::problems::{self, Problem};
use crate::sampling::Method;

use super::algorithm::Algorithm;

pub const ENV_OUTPUT_DIR: &str = "EASENSE_OUTPUT_DIR";
pub const ENV_PARALLELISM: &str = "EASENSE_PARALLELISM";

/// A preset name or an inline list of parameter specs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HyperspaceSpec {
    Preset(String),
    Inline(Vec<ParamSpec>),
}

/// How per-problem scores are folded into one model output per sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Min-max normalize each problem across samples, then average.
    #[default]
    Minmax,
    /// Replace each problem's scores by scaled average ranks, then average.
    Rank,
}

fn default_runs() -> usize {
    1
}

fn default_budget() -> usize {
    10_000
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("easense-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    /// Defaults to the algorithm's preset.
    #[serde(default)]
    pub hyperspace: Option<HyperspaceSpec>,
    pub method: Method,
    #[serde(default)]
    pub r: Option<usize>,
    #[serde(default)]
    pub p: Option<usize>,
    #[serde(default)]
    pub n: Option<usize>,
    /// Problem ids; `soo_suite` and `moo_suite` expand to the full testbeds.
    pub problems: Vec<String>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// Defaults to `best` for single-objective and `igd` for multi-objective algorithms.
    #[serde(default)]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub parallelism: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub aggregation: Aggregation,
    #[serde(default)]
    pub sobol_estimator: SobolEstimator,
    #[serde(default)]
    pub quasi_random: bool,
    /// Histogram bins for score curves; algorithm default when absent.
    #[serde(default)]
    pub bins: Option<usize>,
    #[serde(default)]
    pub smoothing_sigma: Option<f64>,
}

/// Fully validated configuration with everything expanded.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub space: HyperSpace,
    /// Problem ids, sorted and de-duplicated.
    pub problems: Vec<String>,
    pub metrics: Vec<Metric>,
    pub bins: usize,
    pub sigma: f64,
}

impl ExperimentConfig {
    /// Parses TOML or JSON, chosen by the file extension, then applies
    /// environment overrides.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(&text)?,
            _ => Self::from_toml(&text)?,
        };
        cfg.apply_env(|k| std::env::var(k).ok())?;
        Ok(cfg)
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    /// Only the output directory and parallelism may be overridden.
    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<()> {
        if let Some(dir) = var(ENV_OUTPUT_DIR).filter(|d| !d.is_empty()) {
            self.output_dir = PathBuf::from(dir);
        }
        if let Some(p) = var(ENV_PARALLELISM).filter(|p| !p.is_empty()) {
            self.parallelism = p
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{ENV_PARALLELISM} must be a non-negative integer, got `{p}`")))?;
        }
        Ok(())
    }

    pub fn space(&self) -> Result<HyperSpace> {
        match &self.hyperspace {
            None => HyperSpace::preset(self.algorithm.preset()),
            Some(HyperspaceSpec::Preset(name)) => HyperSpace::preset(name),
            Some(HyperspaceSpec::Inline(params)) => HyperSpace::new(params.clone()),
        }
    }

    pub fn resolve(&self) -> Result<Resolved> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be >= 1".into()));
        }
        let space = self.space()?;
        let mid = space.decode(&UnitPoint::new(vec![0.5; space.k()])?)?;
        self.algorithm.check_space(&mid)?;

        let min_lambda = self.algorithm.min_lambda();
        if self.budget < min_lambda {
            return Err(Error::Config(format!("budget {} is below the smallest admissible lambda {min_lambda}", self.budget)));
        }
        match self.method {
            Method::Morris | Method::MorrisLhs => {
                match self.r {
                    Some(r) if r > 0 => {}
                    _ => return Err(Error::Config("morris methods need r >= 1".into())),
                }
                crate::hyperspace::grid_delta(self.levels())?;
            }
            Method::Sobol => match self.n {
                Some(n) if n >= 2 => {}
                _ => return Err(Error::Config("sobol needs n >= 2".into())),
            },
        }

        let mut ids = Vec::new();
        for p in &self.problems {
            match p.as_str() {
                "soo_suite" => ids.extend(problems::soo_suite()),
                "moo_suite" => ids.extend(problems::moo_suite()),
                other => ids.push(Problem::by_id(other)?.id().to_string()),
            }
        }
        ids.sort();
        ids.dedup();
        if ids.is_empty() {
            return Err(Error::Config("no problems listed".into()));
        }
        let multi = self.algorithm.is_multi_objective();
        for id in &ids {
            if Problem::by_id(id)?.is_multi_objective() != multi {
                return Err(Error::Config(format!(
                    "problem `{id}` does not match the objective count of `{}`",
                    self.algorithm.as_str()
                )));
            }
        }

        let mut metrics = if self.metrics.is_empty() {
            vec![if multi { Metric::Igd } else { Metric::Best }]
        } else {
            self.metrics.clone()
        };
        metrics.dedup();
        for m in &metrics {
            if m.is_multi_objective() != multi {
                return Err(Error::Config(format!("metric `{m}` does not apply to `{}`", self.algorithm.as_str())));
            }
        }

        let (bins, sigma) = self.algorithm.default_bins();
        let bins = self.bins.unwrap_or(bins);
        let sigma = self.smoothing_sigma.unwrap_or(sigma);
        if bins < 2 {
            return Err(Error::Config("bins must be >= 2".into()));
        }
        if !(sigma >= 0.0) {
            return Err(Error::Config("smoothing_sigma must be >= 0".into()));
        }
        Ok(Resolved { config: self.clone(), space, problems: ids, metrics, bins, sigma })
    }

    /// Morris grid levels, 10 unless given.
    pub fn levels(&self) -> usize {
        self.p.unwrap_or(10)
    }
}

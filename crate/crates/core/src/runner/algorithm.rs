use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperspace::ConcreteConfig;
use crate::metrics::{score_archive, score_best, Metric, ReferenceData};
use crate::moo::{run_moead, run_nsga3, MoeadConfig, Nsga3Config};
use crate::problems::Problem;
use crate::soo::{run_cmaes, run_de, CmaesConfig, DeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Cmaes,
    De,
    Nsga3,
    Moead,
}

/// Scores of one optimizer run, one per requested metric.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    /// `NaN` where the run or the metric failed.
    pub values: Vec<f64>,
    pub failed: bool,
    pub evals_used: usize,
}

impl CellOutcome {
    fn failure(metrics: usize) -> Self {
        Self { values: vec![f64::NAN; metrics], failed: true, evals_used: 0 }
    }
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Cmaes, Algorithm::De, Algorithm::Nsga3, Algorithm::Moead];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Cmaes => "cmaes",
            Algorithm::De => "de",
            Algorithm::Nsga3 => "nsga3",
            Algorithm::Moead => "moead",
        }
    }

    pub fn preset(self) -> &'static str {
        self.as_str()
    }

    pub fn is_multi_objective(self) -> bool {
        matches!(self, Algorithm::Nsga3 | Algorithm::Moead)
    }

    pub fn min_lambda(self) -> usize {
        match self {
            Algorithm::De => 4,
            _ => 2,
        }
    }

    /// Score-curve bins and smoothing width.
    pub fn default_bins(self) -> (usize, f64) {
        if self.is_multi_objective() {
            (20, 0.99)
        } else {
            (50, 2.0)
        }
    }

    /// Checks that a decoded configuration carries every hyperparameter.
    pub fn check_space(self, c: &ConcreteConfig) -> Result<()> {
        match self {
            Algorithm::Cmaes => CmaesConfig::from_config(c).map(drop),
            Algorithm::De => DeConfig::from_config(c).map(drop),
            Algorithm::Nsga3 => Nsga3Config::from_config(c).map(drop),
            Algorithm::Moead => MoeadConfig::from_config(c).map(drop),
        }
    }

    /// Runs one cell. Configuration and numerical errors become a failed outcome.
    pub fn run(
        self,
        c: &ConcreteConfig,
        problem: &Problem,
        reference: Option<&ReferenceData>,
        metrics: &[Metric],
        budget: usize,
        seed: u64,
    ) -> CellOutcome {
        self.try_run(c, problem, reference, metrics, budget, seed)
            .unwrap_or_else(|_| CellOutcome::failure(metrics.len()))
    }

    fn try_run(
        self,
        c: &ConcreteConfig,
        problem: &Problem,
        reference: Option<&ReferenceData>,
        metrics: &[Metric],
        budget: usize,
        seed: u64,
    ) -> Result<CellOutcome> {
        let soo = |run: crate::soo::RunResult| {
            let best = score_best(&run).value;
            let failed = run.failed || !best.is_finite();
            let v = if failed { f64::NAN } else { best };
            CellOutcome { values: vec![v; metrics.len()], failed, evals_used: run.evals_used }
        };
        let moo = |run: crate::moo::MooRun| -> Result<CellOutcome> {
            let reference = reference.ok_or_else(|| Error::Unsupported("missing reference data".into()))?;
            let values: Vec<f64> = metrics
                .iter()
                .map(|&m| score_archive(&run.archive, m, reference).map_or(f64::NAN, |v| v.value))
                .collect();
            let failed = values.iter().any(|v| !v.is_finite());
            Ok(CellOutcome { values, failed, evals_used: run.evals_used })
        };
        match self {
            Algorithm::Cmaes => Ok(soo(run_cmaes(problem, &CmaesConfig::from_config(c)?, budget, seed)?)),
            Algorithm::De => Ok(soo(run_de(problem, &DeConfig::from_config(c)?, budget, seed)?)),
            Algorithm::Nsga3 => moo(run_nsga3(problem, &Nsga3Config::from_config(c)?, budget, seed)?),
            Algorithm::Moead => moo(run_moead(problem, &MoeadConfig::from_config(c)?, budget, seed)?),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperspace::{HyperSpace, UnitPoint};

    #[test]
    fn oversized_population_fails_softly() {
        let space = HyperSpace::preset("de").unwrap();
        let c = space.decode(&UnitPoint::new(vec![1.0; space.k()]).unwrap()).unwrap();
        let p = Problem::by_id("sphere").unwrap();
        let out = Algorithm::De.run(&c, &p, None, &[Metric::Best], 100, 1);
        assert!(out.failed && out.values[0].is_nan());
        let ok = Algorithm::De.run(&c, &p, None, &[Metric::Best], 3000, 1);
        assert!(!ok.failed && ok.values[0].is_finite() && ok.evals_used <= 3000);
    }

    #[test]
    fn moo_cell_scores_every_metric() {
        let space = HyperSpace::preset("nsga3").unwrap();
        let c = space.decode(&UnitPoint::new(vec![0.1; space.k()]).unwrap()).unwrap();
        let p = Problem::by_id("dtlz2_m3_n10").unwrap();
        let r = ReferenceData::for_problem(&p).unwrap();
        let out = Algorithm::Nsga3.run(&c, &p, Some(&r), &[Metric::Gd, Metric::Igd, Metric::Hv], 1000, 2);
        assert!(!out.failed);
        assert!(out.values.iter().all(|v| v.is_finite() && *v >= 0.0));
    }
}

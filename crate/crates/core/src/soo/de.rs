use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{check_budget, check_range, Incumbent, RunResult};
use crate::error::{Error, Result};
use crate::hyperspace::ConcreteConfig;
use crate::problems::Problem;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossover {
    Bin,
    Exp,
}

/// Base vector selection (the DE variant).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseType {
    Best,
    TargetToBest,
    RandToBest,
    Rand,
}

impl BaseType {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "best" => Self::Best,
            "target-to-best" => Self::TargetToBest,
            "rand-to-best" => Self::RandToBest,
            "rand" => Self::Rand,
            other => return Err(Error::Config(format!("unknown b_type `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeConfig {
    pub lambda: usize,
    pub crossover: Crossover,
    pub crossover_prob: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub b_type: BaseType,
    pub b_lambda_ratio: f64,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            lambda: 50,
            crossover: Crossover::Bin,
            crossover_prob: 0.9,
            beta_min: 0.5,
            beta_max: 0.8,
            b_type: BaseType::TargetToBest,
            b_lambda_ratio: 0.1,
        }
    }
}

impl DeConfig {
    pub fn from_config(c: &ConcreteConfig) -> Result<Self> {
        let cfg = Self {
            lambda: c.real("lambda")? as usize,
            crossover: match c.label("crossover")?.as_str() {
                "bin" => Crossover::Bin,
                "exp" => Crossover::Exp,
                other => return Err(Error::Config(format!("unknown crossover `{other}`"))),
            },
            crossover_prob: c.real("crossover_prob")?,
            beta_min: c.real("beta_min")?,
            beta_max: c.real("beta_max")?,
            b_type: BaseType::parse(&c.label("b_type")?)?,
            b_lambda_ratio: c.real("b_lambda_ratio")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda < 4 {
            return Err(Error::PopulationTooSmall { needed: 4, have: self.lambda });
        }
        check_range("crossover_prob", self.crossover_prob, 0.0, 1.0)?;
        check_range("beta_min", self.beta_min, 0.0, 1.0)?;
        check_range("beta_max", self.beta_max, 0.0, 2.0)?;
        check_range("b_lambda_ratio", self.b_lambda_ratio, 0.0, 1.0)
    }

    /// Effective per-generation range of the scale factor.
    pub fn beta_range(&self) -> (f64, f64) {
        (self.beta_min, self.beta_min.max(self.beta_max))
    }
}

/// `v = base + beta * (x_r2 - x_r3)`.
pub fn de_donor(base: &[f64], x_r2: &[f64], x_r3: &[f64], beta: f64) -> Vec<f64> {
    base.iter().zip(x_r2).zip(x_r3).map(|((b, a), c)| b + beta * (a - c)).collect()
}

pub fn run_de(problem: &Problem, cfg: &DeConfig, budget: usize, seed: u64) -> Result<RunResult> {
    cfg.validate()?;
    check_budget(budget, cfg.lambda)?;
    let n = problem.dim();
    let lam = cfg.lambda;
    let mut rng = seed::rng(seed);
    let bounds = problem.bounds();
    let mut out = [0.0];
    let mut inc = Incumbent::new(n);
    let mut clamped = 0;

    let mut pop: Vec<Vec<f64>> =
        (0..lam).map(|_| bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect()).collect();
    let mut fit: Vec<f64> = pop
        .iter()
        .map(|x| {
            problem.eval_into(x, &mut out);
            inc.offer(x, out[0]);
            out[0]
        })
        .collect();
    let mut evals = lam;
    let mut history = vec![inc.value];

    let pool_size = ((cfg.b_lambda_ratio * lam as f64).ceil() as usize).clamp(1, lam);
    let (b_lo, b_hi) = cfg.beta_range();
    let mut order: Vec<usize> = (0..lam).collect();

    while evals + lam <= budget {
        let beta = if b_hi > b_lo { rng.random_range(b_lo..=b_hi) } else { b_lo };
        order.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)));
        let mut trials = Vec::with_capacity(lam);
        for i in 0..lam {
            // three distinct partners, all different from the target
            let picks = sample(&mut rng, lam - 1, 3);
            let pick = |j: usize| {
                let r = picks.index(j);
                if r >= i { r + 1 } else { r }
            };
            let (r1, r2, r3) = (pick(0), pick(1), pick(2));
            let pbest = &pop[order[rng.random_range(0..pool_size)]];
            let toward = |from: &[f64]| de_donor(from, pbest, from, beta);
            let base = match cfg.b_type {
                BaseType::Best => pbest.clone(),
                BaseType::TargetToBest => toward(&pop[i]),
                BaseType::RandToBest => toward(&pop[r1]),
                BaseType::Rand => pop[r1].clone(),
            };
            let donor = de_donor(&base, &pop[r2], &pop[r3], beta);
            let mut trial = crossover(&pop[i], &donor, cfg, &mut rng);
            if problem.clamp(&mut trial) {
                clamped += 1;
            }
            trials.push(trial);
        }
        for (i, trial) in trials.into_iter().enumerate() {
            problem.eval_into(&trial, &mut out);
            inc.offer(&trial, out[0]);
            if out[0] <= fit[i] {
                fit[i] = out[0];
                pop[i] = trial;
            }
        }
        evals += lam;
        history.push(inc.value);
    }

    Ok(RunResult {
        best_value: inc.value,
        best_point: inc.point,
        evals_used: evals,
        history,
        failed: false,
        repairs: 0,
        clamped,
    })
}

/// Binomial or exponential crossover. The guaranteed donor coordinate is
/// drawn among the coordinates where the donor actually differs from the
/// target, so the trial moves whenever the donor does.
fn crossover(target: &[f64], donor: &[f64], cfg: &DeConfig, rng: &mut seed::Rng) -> Vec<f64> {
    let n = target.len();
    let differing: Vec<usize> = (0..n).filter(|&j| donor[j] != target[j]).collect();
    let forced = if differing.is_empty() {
        rng.random_range(0..n)
    } else {
        differing[rng.random_range(0..differing.len())]
    };
    let cr = cfg.crossover_prob;
    let mut trial = target.to_vec();
    match cfg.crossover {
        Crossover::Bin => {
            for j in 0..n {
                if j == forced || rng.random::<f64>() < cr {
                    trial[j] = donor[j];
                }
            }
        }
        Crossover::Exp => {
            let mut j = forced;
            let mut copied = 0;
            loop {
                trial[j] = donor[j];
                copied += 1;
                j = (j + 1) % n;
                if copied == n || rng.random::<f64>() >= cr {
                    break;
                }
            }
        }
    }
    trial
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn donor_hand_values() {
        assert_eq!(de_donor(&[0.0, 0.0], &[1.0, 2.0], &[0.0, 1.0], 0.5), vec![0.5, 0.5]);
        assert_eq!(de_donor(&[1.0, 2.0], &[3.0, 4.0], &[3.0, 4.0], 0.9), vec![1.0, 2.0]);
        assert_eq!(de_donor(&[1.0, 2.0], &[7.0, -4.0], &[3.0, 4.0], 0.0), vec![1.0, 2.0]);
    }

    #[test]
    fn saturated_binomial_copies_donor() {
        let cfg = DeConfig { crossover_prob: 1.0, ..DeConfig::default() };
        let mut rng = seed::rng(1);
        let t = crossover(&[0.0; 5], &[1.0, 2.0, 3.0, 4.0, 5.0], &cfg, &mut rng);
        assert_eq!(t, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    proptest! {
        #[test]
        fn trial_moves_when_donor_does(seed in any::<u64>(), cr in 0.0f64..1.0, exp in any::<bool>(), j in 0usize..6) {
            let cfg = DeConfig {
                crossover_prob: cr,
                crossover: if exp { Crossover::Exp } else { Crossover::Bin },
                ..DeConfig::default()
            };
            let target = vec![0.0; 6];
            let mut donor = target.clone();
            donor[j] = 1.0;
            let mut rng = seed::rng(seed);
            let t = crossover(&target, &donor, &cfg, &mut rng);
            prop_assert!(t != target);
        }
    }

    #[test]
    fn budget_boundary_is_one_generation() {
        let p = Problem::by_id("sphere_n5").unwrap();
        let cfg = DeConfig { lambda: 20, ..DeConfig::default() };
        let r = run_de(&p, &cfg, 20, 3).unwrap();
        assert_eq!((r.evals_used, r.history.len()), (20, 1));
        let r = run_de(&p, &cfg, 59, 3).unwrap();
        assert_eq!(r.evals_used, 40);
        assert!(matches!(run_de(&p, &cfg, 19, 3), Err(Error::Config(_))));
        let tiny = DeConfig { lambda: 3, ..DeConfig::default() };
        assert!(matches!(run_de(&p, &tiny, 100, 3), Err(Error::PopulationTooSmall { .. })));
    }

    #[test]
    fn history_is_monotone_and_deterministic() {
        let p = Problem::by_id("rastrigin_n5").unwrap();
        for b_type in [BaseType::Best, BaseType::TargetToBest, BaseType::RandToBest, BaseType::Rand] {
            let cfg = DeConfig { b_type, crossover: Crossover::Exp, ..DeConfig::default() };
            let a = run_de(&p, &cfg, 1000, 9).unwrap();
            assert!(a.history.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(a.best_value, *a.history.last().unwrap());
            assert_eq!(a, run_de(&p, &cfg, 1000, 9).unwrap());
        }
    }

    #[test]
    fn beta_range_never_inverts() {
        let cfg = DeConfig { beta_min: 0.7, beta_max: 0.2, ..DeConfig::default() };
        assert_eq!(cfg.beta_range(), (0.7, 0.7));
    }
}

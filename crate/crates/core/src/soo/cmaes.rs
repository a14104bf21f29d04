use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{check_budget, check_range, Incumbent, RunResult};
use crate::error::{Error, Result};
use crate::hyperspace::ConcreteConfig;
use crate::problems::Problem;
use crate::seed;

const EIG_FLOOR: f64 = 1e-12;
/// Consecutive repaired generations after which a run counts as failed.
const MAX_REPAIR_STREAK: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmaesConfig {
    pub lambda: usize,
    pub alpha_mu: f64,
    pub sigma0: f64,
    pub sigma0_scale: bool,
    pub mu_lambda_ratio: f64,
}

impl Default for CmaesConfig {
    fn default() -> Self {
        Self { lambda: 50, alpha_mu: 1.0, sigma0: 0.5, sigma0_scale: false, mu_lambda_ratio: 0.5 }
    }
}

impl CmaesConfig {
    pub fn from_config(c: &ConcreteConfig) -> Result<Self> {
        let cfg = Self {
            lambda: c.real("lambda")? as usize,
            alpha_mu: c.real("alpha_mu")?,
            sigma0: c.real("sigma0")?,
            sigma0_scale: c.flag("sigma0_scale")?,
            mu_lambda_ratio: c.real("mu_lambda_ratio")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda < 2 {
            return Err(Error::PopulationTooSmall { needed: 2, have: self.lambda });
        }
        check_range("alpha_mu", self.alpha_mu, 0.0, 4.0)?;
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return Err(Error::Config(format!("sigma0 = {} must be positive", self.sigma0)));
        }
        check_range("mu_lambda_ratio", self.mu_lambda_ratio, f64::MIN_POSITIVE, 1.0)
    }

    pub fn mu(&self) -> usize {
        ((self.mu_lambda_ratio * self.lambda as f64).ceil() as usize).clamp(1, self.lambda)
    }
}

/// Strategy constants (Hansen's defaults, with the rank-mu rate scaled by `alpha_mu`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmaesConstants {
    pub mu: usize,
    pub weights: Vec<f64>,
    pub mu_eff: f64,
    pub cc: f64,
    pub cs: f64,
    pub c1: f64,
    pub cmu: f64,
    pub damps: f64,
    pub chi_n: f64,
}

impl CmaesConstants {
    pub fn new(cfg: &CmaesConfig, n: usize) -> Self {
        let nf = n as f64;
        let mu = cfg.mu();
        let raw: Vec<f64> = (1..=mu).map(|i| ((mu as f64 + 0.5).ln() - (i as f64).ln()).max(0.0)).collect();
        let total: f64 = raw.iter().sum();
        // mu = 1 gives a zero log-weight; fall back to equal weights whenever
        // the log scheme degenerates
        let weights = if total > 0.0 { raw.iter().map(|w| w / total).collect() } else { vec![1.0 / mu as f64; mu] };
        let mu_eff = 1.0 / weights.iter().map(|w: &f64| w * w).sum::<f64>();
        let cc = (4.0 + mu_eff / nf) / (nf + 4.0 + 2.0 * mu_eff / nf);
        let cs = (mu_eff + 2.0) / (nf + mu_eff + 5.0);
        let c1 = 2.0 / ((nf + 1.3).powi(2) + mu_eff);
        let cmu_std = (1.0 - c1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nf + 2.0).powi(2) + mu_eff));
        let cmu = (cfg.alpha_mu * cmu_std).clamp(0.0, 1.0 - c1);
        let damps = 1.0 + 2.0 * (((mu_eff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + cs;
        let chi_n = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));
        Self { mu, weights, mu_eff, cc, cs, c1, cmu, damps, chi_n }
    }
}

pub fn run_cmaes(problem: &Problem, cfg: &CmaesConfig, budget: usize, seed: u64) -> Result<RunResult> {
    cfg.validate()?;
    check_budget(budget, cfg.lambda)?;
    let n = problem.dim();
    let lam = cfg.lambda;
    let k = CmaesConstants::new(cfg, n);
    let mut rng = seed::rng(seed);
    let bounds = problem.bounds();

    let mut mean = DVector::from_iterator(n, bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)));
    let mut sigma = cfg.sigma0;
    let mut c = if cfg.sigma0_scale {
        DMatrix::from_diagonal(&DVector::from_iterator(n, bounds.iter().map(|&(lo, hi)| ((hi - lo) / 2.0).powi(2))))
    } else {
        DMatrix::identity(n, n)
    };
    let mut pc = DVector::zeros(n);
    let mut ps = DVector::zeros(n);
    let (mut b, mut d) = (DMatrix::identity(n, n), DVector::from_element(n, 1.0));
    if cfg.sigma0_scale {
        d = c.diagonal().map(f64::sqrt);
    }

    let mut inc = Incumbent::new(n);
    let mut out = [0.0];
    let (mut evals, mut gen) = (0usize, 0usize);
    let mut history = Vec::new();
    let (mut repairs, mut streak, mut failed, mut clamped) = (0, 0, false, 0);

    while evals + lam <= budget {
        let mut xs = Vec::with_capacity(lam);
        let mut fit = Vec::with_capacity(lam);
        for _ in 0..lam {
            let z = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
            let mut x: DVector<f64> = &mean + sigma * (&b * d.component_mul(&z));
            if problem.clamp(x.as_mut_slice()) {
                clamped += 1;
            }
            problem.eval_into(x.as_slice(), &mut out);
            inc.offer(x.as_slice(), out[0]);
            fit.push(out[0]);
            xs.push(x);
        }
        evals += lam;
        gen += 1;
        history.push(inc.value);

        let mut idx: Vec<usize> = (0..lam).collect();
        idx.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)));
        let old = mean.clone();
        mean = idx[..k.mu].iter().zip(&k.weights).fold(DVector::zeros(n), |acc: DVector<f64>, (&i, w)| acc + &xs[i] * *w);
        let step = (&mean - &old) / sigma;

        // C^{-1/2} * step
        let inv_sqrt = &b * DMatrix::from_diagonal(&d.map(|v| 1.0 / v)) * b.transpose();
        ps = (1.0 - k.cs) * &ps + (k.cs * (2.0 - k.cs) * k.mu_eff).sqrt() * (&inv_sqrt * &step);
        let ps_norm = ps.norm();
        let hsig = ps_norm / (1.0 - (1.0 - k.cs).powi(2 * gen as i32)).sqrt() / k.chi_n < 1.4 + 2.0 / (n as f64 + 1.0);
        let hs = if hsig { 1.0 } else { 0.0 };
        pc = (1.0 - k.cc) * &pc + hs * (k.cc * (2.0 - k.cc) * k.mu_eff).sqrt() * &step;

        let mut rank_mu = DMatrix::<f64>::zeros(n, n);
        for (&i, w) in idx[..k.mu].iter().zip(&k.weights) {
            let y: DVector<f64> = (&xs[i] - &old) / sigma;
            rank_mu += (&y * y.transpose()) * *w;
        }
        let delta_h = (1.0 - hs) * k.cc * (2.0 - k.cc);
        c = (1.0 - k.c1 - k.cmu) * &c + k.c1 * (&pc * pc.transpose() + delta_h * &c) + k.cmu * rank_mu;
        sigma *= ((k.cs / k.damps) * (ps_norm / k.chi_n - 1.0)).exp();

        if !sigma.is_finite() || sigma <= 0.0 || c.iter().any(|v| !v.is_finite()) {
            failed = true;
            break;
        }
        c = 0.5 * (&c + c.transpose());
        let eig = SymmetricEigen::new(c.clone());
        let mut vals = eig.eigenvalues;
        // C and sigma shrink together on converging runs, so the floor is
        // relative to the largest eigenvalue
        let floor = EIG_FLOOR * vals.max().max(f64::MIN_POSITIVE);
        if vals.iter().any(|&v| v < floor) {
            vals.apply(|v| *v = v.max(floor));
            c = &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose();
            repairs += 1;
            streak += 1;
            if streak >= MAX_REPAIR_STREAK {
                failed = true;
                break;
            }
        } else {
            streak = 0;
        }
        b = eig.eigenvectors;
        d = vals.map(f64::sqrt);
    }

    Ok(RunResult { best_value: inc.value, best_point: inc.point, evals_used: evals, history, failed, repairs, clamped })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hansen_defaults() {
        let k = CmaesConstants::new(&CmaesConfig { lambda: 10, ..CmaesConfig::default() }, 10);
        assert_eq!(k.mu, 5);
        assert!((k.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(k.weights.windows(2).all(|w| w[0] > w[1]));
        // textbook values for n=10, lambda=10
        assert!((k.mu_eff - 3.1672).abs() < 1e-3, "{}", k.mu_eff);
        assert!((k.c1 - 2.0 / (11.3f64.powi(2) + k.mu_eff)).abs() < 1e-15);
    }

    #[test]
    fn alpha_mu_scales_rank_mu_rate() {
        let base = CmaesConstants::new(&CmaesConfig::default(), 10);
        let off = CmaesConstants::new(&CmaesConfig { alpha_mu: 0.0, ..CmaesConfig::default() }, 10);
        let big = CmaesConstants::new(&CmaesConfig { alpha_mu: 4.0, ..CmaesConfig::default() }, 2);
        assert_eq!(off.cmu, 0.0);
        assert!(base.cmu > 0.0);
        assert!(big.cmu <= 1.0 - big.c1 + 1e-15);
    }

    #[test]
    fn full_selection_is_handled() {
        let cfg = CmaesConfig { mu_lambda_ratio: 1.0, lambda: 12, ..CmaesConfig::default() };
        let k = CmaesConstants::new(&cfg, 4);
        assert_eq!(k.mu, 12);
        assert!(k.weights.iter().all(|w| *w > 0.0));
        let p = Problem::by_id("sphere_n4").unwrap();
        let r = run_cmaes(&p, &cfg, 600, 1).unwrap();
        assert!(!r.failed && r.best_value.is_finite());
    }

    #[test]
    fn generation_count_follows_budget() {
        let p = Problem::by_id("sphere_n3").unwrap();
        let cfg = CmaesConfig { lambda: 10, ..CmaesConfig::default() };
        let r = run_cmaes(&p, &cfg, 10_000, 2).unwrap();
        assert_eq!((r.history.len(), r.evals_used), (1000, 10_000));
        let r = run_cmaes(&p, &cfg, 10_009, 2).unwrap();
        assert_eq!(r.evals_used, 10_000);
    }

    #[test]
    fn monotone_and_deterministic() {
        let p = Problem::by_id("rosenbrock_n5").unwrap();
        for scale in [false, true] {
            let cfg = CmaesConfig { sigma0_scale: scale, alpha_mu: 3.0, ..CmaesConfig::default() };
            let a = run_cmaes(&p, &cfg, 2000, 4).unwrap();
            assert!(a.history.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(a, run_cmaes(&p, &cfg, 2000, 4).unwrap());
        }
    }

    #[test]
    fn converges_on_sphere() {
        let p = Problem::by_id("sphere_n10").unwrap();
        let r = run_cmaes(&p, &CmaesConfig::default(), 10_000, 11).unwrap();
        assert!(r.best_value < 1e-6, "{}", r.best_value);
    }
}

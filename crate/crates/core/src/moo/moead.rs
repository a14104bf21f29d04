use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{
    check_problem, das_dennis_points, eval, init_population, polynomial_mutation, sbx, MooCommonConfig, MooRun,
    ParetoArchive,
};
use crate::error::{Error, Result};
use crate::hyperspace::ConcreteConfig;
use crate::problems::{binomial, Problem};
use crate::seed;
use crate::soo::check_range;

/// PBI penalty.
pub const PBI_THETA: f64 = 5.0;
const ZERO_WEIGHT: f64 = 1e-6;
const NADIR_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecompositionMode {
    #[serde(rename = "PBI")]
    Pbi,
    Tchebycheff,
    #[serde(rename = "Tchebycheff-normalized")]
    TchebycheffNormalized,
    #[serde(rename = "modified-Tchebycheff")]
    ModifiedTchebycheff,
}

impl DecompositionMode {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "PBI" => Self::Pbi,
            "Tchebycheff" => Self::Tchebycheff,
            "Tchebycheff-normalized" => Self::TchebycheffNormalized,
            "modified-Tchebycheff" => Self::ModifiedTchebycheff,
            other => return Err(Error::Config(format!("unknown decomposition mode `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoeadConfig {
    #[serde(flatten)]
    pub common: MooCommonConfig,
    pub mode: DecompositionMode,
    pub neighbor_ratio: f64,
}

impl Default for MoeadConfig {
    fn default() -> Self {
        Self { common: MooCommonConfig::default(), mode: DecompositionMode::Tchebycheff, neighbor_ratio: 0.2 }
    }
}

impl MoeadConfig {
    pub fn from_config(c: &ConcreteConfig) -> Result<Self> {
        let cfg = Self {
            common: MooCommonConfig::from_config(c)?,
            mode: DecompositionMode::parse(&c.label("mode")?)?,
            neighbor_ratio: c.real("neighbor_ratio")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.common.validate()?;
        check_range("neighbor_ratio", self.neighbor_ratio, 0.0, 1.0)
    }

    /// Neighborhood size for `n` subproblems.
    pub fn neighborhood(&self, n: usize) -> usize {
        ((self.neighbor_ratio * n as f64).round() as usize).max(2).min(n)
    }
}

/// Scalarized value of `f` for weight `w` relative to the ideal `z` (and the
/// nadir estimate for the normalized variant).
pub fn decompose(f: &[f64], w: &[f64], z: &[f64], nadir: &[f64], mode: DecompositionMode, theta: f64) -> f64 {
    let wt = |i: usize| if w[i] == 0.0 { ZERO_WEIGHT } else { w[i] };
    let m = f.len();
    match mode {
        DecompositionMode::Tchebycheff => (0..m).map(|i| wt(i) * (f[i] - z[i]).abs()).fold(0.0, f64::max),
        DecompositionMode::TchebycheffNormalized => (0..m)
            .map(|i| wt(i) * (f[i] - z[i]).abs() / (nadir[i] - z[i]).max(NADIR_GUARD))
            .fold(0.0, f64::max),
        DecompositionMode::ModifiedTchebycheff => (0..m).map(|i| (f[i] - z[i]).abs() / wt(i)).fold(0.0, f64::max),
        DecompositionMode::Pbi => {
            let norm = (0..m).map(|i| wt(i) * wt(i)).sum::<f64>().sqrt();
            let d1 = (0..m).map(|i| (f[i] - z[i]) * wt(i)).sum::<f64>() / norm;
            let d2 = (0..m).map(|i| (f[i] - z[i] - d1 * wt(i) / norm).powi(2)).sum::<f64>().sqrt();
            d1 + theta * d2
        }
    }
}

/// Exactly `n` weight vectors: the smallest Das-Dennis lattice with at least
/// `n` points, sorted lexicographically, with the tail dropped.
pub fn weight_vectors(m: usize, n: usize) -> Result<Vec<Vec<f64>>> {
    let mut h = 1;
    while binomial(h + m - 1, m - 1) < n {
        h += 1;
    }
    let mut w = das_dennis_points(m, h)?;
    w.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    w.truncate(n);
    Ok(w)
}

fn neighborhoods(w: &[Vec<f64>], t: usize) -> Vec<Vec<usize>> {
    w.iter()
        .map(|a| {
            let mut idx: Vec<(f64, usize)> = w
                .iter()
                .enumerate()
                .map(|(j, b)| (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>(), j))
                .collect();
            idx.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
            idx.into_iter().take(t).map(|(_, j)| j).collect()
        })
        .collect()
}

pub fn run_moead(problem: &Problem, cfg: &MoeadConfig, budget: usize, seed: u64) -> Result<MooRun> {
    cfg.validate()?;
    check_problem(problem)?;
    let lam = cfg.common.lambda;
    crate::soo::check_budget(budget, lam)?;
    let m = problem.n_obj();
    let w = weight_vectors(m, lam)?;
    let t = cfg.neighborhood(lam);
    let hood = neighborhoods(&w, t);
    let bounds = problem.bounds();
    let mut rng = seed::rng(seed);

    let (mut xs, mut fs) = init_population(problem, lam, &mut rng);
    let mut evals = lam;
    let mut z: Vec<f64> = (0..m).map(|j| fs.iter().map(|f| f[j]).fold(f64::INFINITY, f64::min)).collect();
    let mut archive = ParetoArchive::default();
    archive.push_generation(&fs);
    let mut generations = 0;

    while evals + lam <= budget {
        let nadir: Vec<f64> = (0..m).map(|j| fs.iter().map(|f| f[j]).fold(f64::NEG_INFINITY, f64::max)).collect();
        for i in 0..lam {
            let b = &hood[i];
            let a = rng.random_range(0..b.len());
            let mut c = rng.random_range(0..b.len() - 1);
            if c >= a {
                c += 1;
            }
            let (mut child, _) =
                sbx(&xs[b[a]], &xs[b[c]], cfg.common.sbx_prob, cfg.common.sbx_di, bounds, &mut rng);
            polynomial_mutation(&mut child, cfg.common.pm_prob, cfg.common.pm_di, bounds, &mut rng);
            let fc = eval(problem, &child);
            for (zj, v) in z.iter_mut().zip(&fc) {
                *zj = zj.min(*v);
            }
            for &j in b {
                let new = decompose(&fc, &w[j], &z, &nadir, cfg.mode, PBI_THETA);
                let old = decompose(&fs[j], &w[j], &z, &nadir, cfg.mode, PBI_THETA);
                if new < old {
                    xs[j] = child.clone();
                    fs[j] = fc.clone();
                }
            }
        }
        evals += lam;
        archive.push_generation(&fs);
        generations += 1;
    }

    Ok(MooRun { archive, final_objectives: fs, final_decisions: xs, evals_used: evals, generations, clamped: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::igd;
    use proptest::prelude::*;

    const MODES: [DecompositionMode; 4] = [
        DecompositionMode::Pbi,
        DecompositionMode::Tchebycheff,
        DecompositionMode::TchebycheffNormalized,
        DecompositionMode::ModifiedTchebycheff,
    ];

    #[test]
    fn decompose_hand_values() {
        let z = [1.0, 1.0, 1.0];
        let nadir = [2.0, 2.0, 2.0];
        let w = [0.5, 0.25, 0.25];
        for mode in MODES {
            assert_eq!(decompose(&z, &w, &z, &nadir, mode, PBI_THETA), 0.0);
        }
        let f = [1.2, 1.4, 1.1];
        assert!((decompose(&f, &w, &z, &nadir, DecompositionMode::Tchebycheff, PBI_THETA) - 0.1).abs() < 1e-12);
        // parallel to w: no perpendicular penalty
        let f = [1.0 + 0.5, 1.0 + 0.25, 1.0 + 0.25];
        let norm = (0.25f64 + 0.0625 + 0.0625).sqrt();
        assert!((decompose(&f, &w, &z, &nadir, DecompositionMode::Pbi, PBI_THETA) - norm).abs() < 1e-12);
    }

    #[test]
    fn zero_weights_and_degenerate_nadir_are_guarded() {
        let v = decompose(&[1.0, 0.0], &[1.0, 0.0], &[0.0, 0.0], &[0.0, 0.0], DecompositionMode::ModifiedTchebycheff, 5.0);
        assert!(v.is_finite());
        let v = decompose(&[1.0, 0.0], &[0.5, 0.5], &[0.0, 0.0], &[0.0, 0.0], DecompositionMode::TchebycheffNormalized, 5.0);
        assert!(v.is_finite());
    }

    proptest! {
        #[test]
        fn decompose_non_negative_and_monotone(
            d in prop::collection::vec(0.0f64..5.0, 3),
            raw in prop::collection::vec(0.0f64..1.0, 3),
            bump in 0.0f64..3.0,
            axis in 0usize..3,
        ) {
            let s: f64 = raw.iter().sum::<f64>().max(1e-9);
            let w: Vec<f64> = raw.iter().map(|v| v / s).collect();
            let z = [0.5, -1.0, 2.0];
            let f: Vec<f64> = z.iter().zip(&d).map(|(a, b)| a + b).collect();
            let nadir: Vec<f64> = f.iter().map(|v| v + 1.0).collect();
            for mode in MODES {
                prop_assert!(decompose(&f, &w, &z, &nadir, mode, PBI_THETA) >= -1e-12);
            }
            let mut g = f.clone();
            g[axis] += bump;
            for mode in [DecompositionMode::Tchebycheff, DecompositionMode::ModifiedTchebycheff, DecompositionMode::TchebycheffNormalized] {
                prop_assert!(decompose(&g, &w, &z, &nadir, mode, PBI_THETA) >= decompose(&f, &w, &z, &nadir, mode, PBI_THETA));
            }
        }
    }

    #[test]
    fn neighborhood_rounding() {
        let cfg = MoeadConfig { neighbor_ratio: 0.05, ..MoeadConfig::default() };
        assert_eq!(cfg.neighborhood(100), 5);
        assert_eq!(cfg.neighborhood(10), 2);
        assert_eq!(cfg.neighborhood(20), 2);
    }

    #[test]
    fn weights_truncate_to_lambda() {
        for n in [10, 50, 91, 92, 100] {
            let w = weight_vectors(3, n).unwrap();
            assert_eq!(w.len(), n);
            assert!(w.iter().all(|v| (v.iter().sum::<f64>() - 1.0).abs() < 1e-12));
        }
        let hood = neighborhoods(&weight_vectors(3, 15).unwrap(), 4);
        assert!(hood.iter().enumerate().all(|(i, b)| b[0] == i && b.len() == 4));
    }

    #[test]
    fn budget_and_determinism() {
        let p = Problem::by_id("dtlz1_m3_n10").unwrap();
        let cfg = MoeadConfig { common: MooCommonConfig { lambda: 10, ..Default::default() }, ..MoeadConfig::default() };
        let r = run_moead(&p, &cfg, 10_000, 3).unwrap();
        assert_eq!((r.generations, r.evals_used, r.archive.len()), (999, 10_000, 10_000));
        assert_eq!(r, run_moead(&p, &cfg, 10_000, 3).unwrap());
    }

    #[test]
    fn converges_on_dtlz2() {
        let p = Problem::by_id("dtlz2_m3_n10").unwrap();
        let z = p.sample_true_front(91).unwrap();
        for mode in MODES {
            let cfg = MoeadConfig { mode, ..MoeadConfig::default() };
            let r = run_moead(&p, &cfg, 10_000, 7).unwrap();
            let v = igd(&r.archive.nondominated(), &z).unwrap();
            assert!(v < 0.15, "{mode:?}: {v}");
        }
    }
}

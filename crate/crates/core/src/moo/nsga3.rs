use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{
    check_problem, das_dennis_points, eval, fast_nondominated_sort, init_population, polynomial_mutation, sbx,
    MooCommonConfig, MooRun, ParetoArchive,
};
use crate::error::{Error, Result};
use crate::hyperspace::ConcreteConfig;
use crate::problems::{binomial, Problem};
use crate::seed;
use crate::soo::check_budget;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nsga3Config {
    #[serde(flatten)]
    pub common: MooCommonConfig,
    pub tournament_k: usize,
}

impl Default for Nsga3Config {
    fn default() -> Self {
        Self { common: MooCommonConfig::default(), tournament_k: 2 }
    }
}

impl Nsga3Config {
    pub fn from_config(c: &ConcreteConfig) -> Result<Self> {
        let cfg = Self { common: MooCommonConfig::from_config(c)?, tournament_k: c.real("tournament_k")? as usize };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.common.validate()?;
        if self.tournament_k < 1 {
            return Err(Error::Config("tournament_k must be >= 1".into()));
        }
        Ok(())
    }
}

/// Reference directions: the largest Das-Dennis lattice not exceeding `lambda`
/// points (at least one division).
pub(crate) fn reference_points(m: usize, lambda: usize) -> Result<Vec<Vec<f64>>> {
    let mut h = 1;
    while binomial(h + m, m - 1) <= lambda {
        h += 1;
    }
    das_dennis_points(m, h)
}

pub fn run_nsga3(problem: &Problem, cfg: &Nsga3Config, budget: usize, seed: u64) -> Result<MooRun> {
    cfg.validate()?;
    check_problem(problem)?;
    let lam = cfg.common.lambda;
    check_budget(budget, lam)?;
    let refs = reference_points(problem.n_obj(), lam)?;
    let bounds = problem.bounds();
    let mut rng = seed::rng(seed);

    let (mut xs, mut fs) = init_population(problem, lam, &mut rng);
    let mut evals = lam;
    let mut archive = ParetoArchive::default();
    archive.push_generation(&fs);
    let Selection { mut rank, mut niche, .. } = environmental_selection(&fs, lam, &refs, &mut rng);
    let mut generations = 0;

    while evals + lam <= budget {
        let mut kids: Vec<Vec<f64>> = Vec::with_capacity(lam + 1);
        while kids.len() < lam {
            let a = tournament(&rank, &niche, cfg.tournament_k, &mut rng);
            let b = tournament(&rank, &niche, cfg.tournament_k, &mut rng);
            let (mut c1, mut c2) = sbx(&xs[a], &xs[b], cfg.common.sbx_prob, cfg.common.sbx_di, bounds, &mut rng);
            polynomial_mutation(&mut c1, cfg.common.pm_prob, cfg.common.pm_di, bounds, &mut rng);
            polynomial_mutation(&mut c2, cfg.common.pm_prob, cfg.common.pm_di, bounds, &mut rng);
            kids.push(c1);
            kids.push(c2);
        }
        kids.truncate(lam);
        let kid_fs: Vec<Vec<f64>> = kids.iter().map(|x| eval(problem, x)).collect();
        evals += lam;

        xs.extend(kids);
        fs.extend(kid_fs);
        let sel = environmental_selection(&fs, lam, &refs, &mut rng);
        xs = sel.chosen.iter().map(|&i| xs[i].clone()).collect();
        fs = sel.chosen.iter().map(|&i| fs[i].clone()).collect();
        rank = sel.rank;
        niche = sel.niche;
        archive.push_generation(&fs);
        generations += 1;
    }

    Ok(MooRun { archive, final_objectives: fs, final_decisions: xs, evals_used: evals, generations, clamped: 0 })
}

/// Size-`k` tournament: lower front rank wins, then lower niche count; the
/// earliest drawn entrant wins remaining ties.
fn tournament(rank: &[usize], niche: &[usize], k: usize, rng: &mut seed::Rng) -> usize {
    let mut best = rng.random_range(0..rank.len());
    for _ in 1..k {
        let c = rng.random_range(0..rank.len());
        if (rank[c], niche[c]) < (rank[best], niche[best]) {
            best = c;
        }
    }
    best
}

struct Selection {
    chosen: Vec<usize>,
    /// Front rank of each chosen member.
    rank: Vec<usize>,
    /// Niche count of the reference point each chosen member is attached to.
    niche: Vec<usize>,
}

/// Picks `n` survivors from `objs` by fronts, splitting the last front by
/// reference-point niching.
fn environmental_selection(objs: &[Vec<f64>], n: usize, refs: &[Vec<f64>], rng: &mut seed::Rng) -> Selection {
    let fronts = fast_nondominated_sort(objs);
    let mut rank_of = vec![usize::MAX; objs.len()];
    let mut st: Vec<usize> = Vec::new();
    let mut last = 0;
    for (r, front) in fronts.iter().enumerate() {
        for &i in front {
            rank_of[i] = r;
        }
        st.extend(front);
        last = r;
        if st.len() >= n {
            break;
        }
    }
    let last_front = &fronts[last];
    let mut chosen: Vec<usize> = st.iter().copied().filter(|&i| rank_of[i] < last).collect();

    let normed = normalize(objs, &st);
    let (assoc, dist): (Vec<usize>, Vec<f64>) = st.iter().map(|&i| associate(&normed[i], refs)).unzip();
    let mut pos_of = vec![usize::MAX; objs.len()];
    for (p, &i) in st.iter().enumerate() {
        pos_of[i] = p;
    }
    let pos = |i: usize| pos_of[i];

    let mut rho = vec![0usize; refs.len()];
    for &i in &chosen {
        rho[assoc[pos(i)]] += 1;
    }
    if st.len() == n {
        chosen.extend(last_front);
        for &i in last_front {
            rho[assoc[pos(i)]] += 1;
        }
    } else {
        let mut pool: Vec<usize> = last_front.clone();
        let mut open = vec![true; refs.len()];
        while chosen.len() < n {
            let min_rho = (0..refs.len()).filter(|&j| open[j]).map(|j| rho[j]).min().expect("a reference stays open");
            let js: Vec<usize> = (0..refs.len()).filter(|&j| open[j] && rho[j] == min_rho).collect();
            let j = js[rng.random_range(0..js.len())];
            let members: Vec<usize> = pool.iter().copied().filter(|&i| assoc[pos(i)] == j).collect();
            if members.is_empty() {
                open[j] = false;
                continue;
            }
            let pick = if rho[j] == 0 {
                *members.iter().min_by(|&&a, &&b| dist[pos(a)].total_cmp(&dist[pos(b)])).expect("non-empty")
            } else {
                members[rng.random_range(0..members.len())]
            };
            chosen.push(pick);
            rho[j] += 1;
            pool.retain(|&i| i != pick);
        }
    }
    let rank = chosen.iter().map(|&i| rank_of[i]).collect();
    let niche = chosen.iter().map(|&i| rho[assoc[pos(i)]]).collect();
    Selection { chosen, rank, niche }
}

/// Ideal-point translation and hyperplane intercepts from the extreme points;
/// falls back to the per-objective maximum when the hyperplane degenerates.
fn normalize(objs: &[Vec<f64>], st: &[usize]) -> Vec<Vec<f64>> {
    let m = objs[st[0]].len();
    let ideal: Vec<f64> = (0..m).map(|j| st.iter().map(|&i| objs[i][j]).fold(f64::INFINITY, f64::min)).collect();
    let tr = |i: usize| -> Vec<f64> { objs[i].iter().zip(&ideal).map(|(f, z)| f - z).collect() };
    let translated: Vec<Vec<f64>> = st.iter().map(|&i| tr(i)).collect();

    let mut extremes = DMatrix::<f64>::zeros(m, m);
    for axis in 0..m {
        let asf = |f: &[f64]| {
            f.iter().enumerate().map(|(j, v)| v / if j == axis { 1.0 } else { 1e-6 }).fold(f64::NEG_INFINITY, f64::max)
        };
        let best = translated.iter().min_by(|a, b| asf(a).total_cmp(&asf(b))).expect("non-empty");
        extremes.row_mut(axis).copy_from(&DVector::from_column_slice(best).transpose());
    }
    let fallback = || -> Vec<f64> {
        (0..m).map(|j| translated.iter().map(|f| f[j]).fold(0.0, f64::max).max(1e-12)).collect()
    };
    let intercepts = extremes
        .lu()
        .solve(&DVector::from_element(m, 1.0))
        .map(|b| b.iter().map(|v| 1.0 / v).collect::<Vec<f64>>())
        .filter(|a| a.iter().all(|v| v.is_finite() && *v > 1e-6))
        .unwrap_or_else(fallback);

    let mut out = vec![Vec::new(); objs.len()];
    for (&i, f) in st.iter().zip(translated) {
        out[i] = f.iter().zip(&intercepts).map(|(v, a)| v / a).collect();
    }
    out
}

/// Nearest reference line by perpendicular distance.
fn associate(f: &[f64], refs: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, w) in refs.iter().enumerate() {
        let ww: f64 = w.iter().map(|v| v * v).sum();
        let t: f64 = f.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / ww;
        let d: f64 = f.iter().zip(w).map(|(a, b)| (a - t * b).powi(2)).sum::<f64>().sqrt();
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

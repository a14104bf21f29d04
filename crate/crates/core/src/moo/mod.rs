//! Multi-objective optimizers (NSGA-III, MOEA/D) and their shared machinery.

mod moead;
mod nsga3;
mod operators;

use serde::{Deserialize, Serialize};

pub use moead::{decompose, run_moead, weight_vectors, DecompositionMode, MoeadConfig, PBI_THETA};
pub use nsga3::{run_nsga3, Nsga3Config};
pub use operators::{polynomial_mutation, sbx};

use crate::error::{Error, Result};
use crate::hyperspace::ConcreteConfig;
use crate::problems::{binomial, Problem};
use crate::soo::check_range;

/// All points of the simplex lattice `{i / divisions}` with `m` coordinates
/// summing to one, in lexicographically descending order of the first
/// coordinates.
pub fn das_dennis_points(m: usize, divisions: usize) -> Result<Vec<Vec<f64>>> {
    if m < 2 || divisions < 1 {
        return Err(Error::InvalidInput(format!("das-dennis needs m >= 2 and divisions >= 1, got ({m}, {divisions})")));
    }
    fn rec(left: usize, depth: usize, cur: &mut Vec<usize>, h: usize, out: &mut Vec<Vec<f64>>) {
        if depth == 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / h as f64).collect());
            cur.pop();
            return;
        }
        for i in (0..=left).rev() {
            cur.push(i);
            rec(left - i, depth - 1, cur, h, out);
            cur.pop();
        }
    }
    let mut out = Vec::with_capacity(binomial(divisions + m - 1, m - 1));
    rec(divisions, m, &mut Vec::with_capacity(m), divisions, &mut out);
    Ok(out)
}

/// Pareto dominance for minimization.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        strictly |= x < y;
    }
    strictly
}

/// Deb's fast non-dominated sort. Returns fronts of indices into `objs`,
/// each front in ascending index order.
pub fn fast_nondominated_sort(objs: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = objs.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&objs[i], &objs[j]) {
                dominated_by_me[i].push(j);
                count[j] += 1;
            } else if dominates(&objs[j], &objs[i]) {
                dominated_by_me[j].push(i);
                count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by_me[i] {
                count[j] -= 1;
                if count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Non-dominated subset of `points` with exact duplicates removed, sorted
/// lexicographically.
pub fn nondominated_unique(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
    sorted.sort_by(|a, b| lex_cmp(a, b));
    sorted.dedup_by(|a, b| a == b);
    // a point can only be dominated by one that sorts before it
    let mut keep: Vec<Vec<f64>> = Vec::new();
    for p in sorted {
        if !keep.iter().any(|q| dominates(q, p)) {
            keep.push(p.clone());
        }
    }
    keep
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

/// Union of every generation's population in objective space.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoArchive {
    pub points: Vec<Vec<f64>>,
    /// Population size recorded at each generation (initial population first).
    pub generation_sizes: Vec<usize>,
}

impl ParetoArchive {
    pub fn push_generation<'a>(&mut self, pop: impl IntoIterator<Item = &'a Vec<f64>>) {
        let before = self.points.len();
        self.points.extend(pop.into_iter().cloned());
        self.generation_sizes.push(self.points.len() - before);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn generations(&self) -> usize {
        self.generation_sizes.len()
    }

    /// Non-dominated, de-duplicated subset used for metric computation.
    pub fn nondominated(&self) -> Vec<Vec<f64>> {
        nondominated_unique(&self.points)
    }
}

/// Outcome of one multi-objective run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MooRun {
    pub archive: ParetoArchive,
    pub final_objectives: Vec<Vec<f64>>,
    pub final_decisions: Vec<Vec<f64>>,
    pub evals_used: usize,
    /// Offspring generations after initialization.
    pub generations: usize,
    pub clamped: usize,
}

/// Hyperparameters shared by NSGA-III and MOEA/D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MooCommonConfig {
    pub lambda: usize,
    pub sbx_prob: f64,
    pub sbx_di: f64,
    pub pm_prob: f64,
    pub pm_di: f64,
}

impl Default for MooCommonConfig {
    fn default() -> Self {
        Self { lambda: 92, sbx_prob: 1.0, sbx_di: 30.0, pm_prob: 0.1, pm_di: 20.0 }
    }
}

impl MooCommonConfig {
    pub fn from_config(c: &ConcreteConfig) -> Result<Self> {
        let cfg = Self {
            lambda: c.real("lambda")? as usize,
            sbx_prob: c.real("sbx_prob")?,
            sbx_di: c.real("sbx_di")?,
            pm_prob: c.real("pm_prob")?,
            pm_di: c.real("pm_di")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda < 2 {
            return Err(Error::PopulationTooSmall { needed: 2, have: self.lambda });
        }
        check_range("sbx_prob", self.sbx_prob, 0.0, 1.0)?;
        check_range("pm_prob", self.pm_prob, 0.0, 1.0)?;
        check_range("sbx_di", self.sbx_di, 0.0, f64::MAX)?;
        check_range("pm_di", self.pm_di, 0.0, f64::MAX)
    }
}

/// Random initial population inside the box, evaluated.
pub(crate) fn init_population(problem: &Problem, lambda: usize, rng: &mut crate::seed::Rng) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    use rand::Rng as _;
    let xs: Vec<Vec<f64>> = (0..lambda)
        .map(|_| problem.bounds().iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect())
        .collect();
    let fs = xs.iter().map(|x| eval(problem, x)).collect();
    (xs, fs)
}

pub(crate) fn eval(problem: &Problem, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; problem.n_obj()];
    problem.eval_into(x, &mut out);
    out
}

pub(crate) fn check_problem(problem: &Problem) -> Result<()> {
    if problem.n_obj() < 2 {
        return Err(Error::Unsupported(format!("`{}` is single-objective", problem.id())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng as _;

    #[test]
    fn das_dennis_counts() {
        assert_eq!(das_dennis_points(3, 4).unwrap().len(), 15);
        assert_eq!(das_dennis_points(3, 12).unwrap().len(), 91);
        assert_eq!(das_dennis_points(2, 1).unwrap(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(das_dennis_points(1, 3).is_err());
        assert!(das_dennis_points(3, 0).is_err());
        for m in 2..6 {
            for h in 1..9 {
                let pts = das_dennis_points(m, h).unwrap();
                assert_eq!(pts.len(), binomial(h + m - 1, m - 1));
                for p in &pts {
                    assert!(p.iter().all(|v| *v >= 0.0));
                    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn sort_hand_instances() {
        assert_eq!(fast_nondominated_sort(&[vec![1.0, 1.0]]), vec![vec![0]]);
        let f = fast_nondominated_sort(&[vec![1.0, 2.0], vec![2.0, 1.0], vec![3.0, 3.0]]);
        assert_eq!(f, vec![vec![0, 1], vec![2]]);
        let f = fast_nondominated_sort(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![3.0, 3.0]]);
        assert_eq!(f, vec![vec![0, 1], vec![2]]);
        assert!(fast_nondominated_sort(&[]).is_empty());
    }

    /// Peel fronts by repeated brute-force non-domination checks.
    fn oracle_fronts(objs: &[Vec<f64>]) -> Vec<Vec<usize>> {
        let mut left: Vec<usize> = (0..objs.len()).collect();
        let mut fronts = Vec::new();
        while !left.is_empty() {
            let front: Vec<usize> = left
                .iter()
                .copied()
                .filter(|&i| !left.iter().any(|&j| j != i && dominates(&objs[j], &objs[i])))
                .collect();
            left.retain(|i| !front.contains(i));
            fronts.push(front);
        }
        fronts
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn sort_matches_oracle(seed in any::<u64>(), size in 1usize..=64, m in 2usize..=3, grid in any::<bool>()) {
            let mut rng = crate::seed::rng(seed);
            // a coarse grid produces many ties and duplicates
            let objs: Vec<Vec<f64>> = (0..size)
                .map(|_| (0..m).map(|_| if grid { rng.random_range(0..4) as f64 } else { rng.random() }).collect())
                .collect();
            let fronts = fast_nondominated_sort(&objs);
            prop_assert_eq!(&fronts, &oracle_fronts(&objs));
            let mut all: Vec<usize> = fronts.concat();
            all.sort_unstable();
            prop_assert_eq!(all, (0..size).collect::<Vec<_>>());
        }

        #[test]
        fn nondominated_unique_matches_first_front(seed in any::<u64>(), size in 1usize..=64) {
            let mut rng = crate::seed::rng(seed);
            let objs: Vec<Vec<f64>> = (0..size).map(|_| (0..3).map(|_| rng.random_range(0..5) as f64).collect()).collect();
            let mut expect: Vec<Vec<f64>> = fast_nondominated_sort(&objs)[0].iter().map(|&i| objs[i].clone()).collect();
            expect.sort_by(|a, b| lex_cmp(a, b));
            expect.dedup();
            prop_assert_eq!(nondominated_unique(&objs), expect);
        }
    }

    #[test]
    fn archive_tracks_generations() {
        let mut a = ParetoArchive::default();
        let g0 = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        let g1 = vec![vec![1.0, 2.0], vec![3.0, 3.0], vec![0.5, 0.5]];
        a.push_generation(&g0);
        a.push_generation(&g1);
        assert_eq!((a.len(), a.generations()), (5, 2));
        assert_eq!(a.nondominated(), vec![vec![0.5, 0.5]]);
    }
}

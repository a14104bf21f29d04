//! Morris OAT trajectories, Morris-LHS trajectories and Sobol A/B/C matrices.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperspace::{grid_delta, HyperSpace, UnitPoint};
use crate::seed;

/// Sampling scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Morris,
    MorrisLhs,
    Sobol,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Morris => "morris",
            Method::MorrisLhs => "morris_lhs",
            Method::Sobol => "sobol",
        }
    }

    pub const ALL: [Method; 3] = [Method::Morris, Method::MorrisLhs, Method::Sobol];
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "morris" => Ok(Method::Morris),
            "morris_lhs" => Ok(Method::MorrisLhs),
            "sobol" => Ok(Method::Sobol),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One OAT walk of `k + 1` grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<UnitPoint>,
    /// `moved_dim[j]` is the coordinate changed between `points[j]` and `points[j+1]`.
    pub moved_dim: Vec<usize>,
    pub delta_signs: Vec<i8>,
}

impl Trajectory {
    pub fn k(&self) -> usize {
        self.moved_dim.len()
    }

    /// Checks the OAT step law against `delta`.
    pub fn check(&self, delta: f64) -> Result<()> {
        let k = self.k();
        if self.points.len() != k + 1 || self.delta_signs.len() != k {
            return Err(Error::Shape { expected: k + 1, got: self.points.len() });
        }
        let mut seen = vec![false; k];
        for (j, &d) in self.moved_dim.iter().enumerate() {
            if d >= k || std::mem::replace(&mut seen[d], true) {
                return Err(Error::InvalidInput(format!("moved_dim is not a permutation: {:?}", self.moved_dim)));
            }
            let (a, b) = (self.points[j].coords(), self.points[j + 1].coords());
            for i in 0..k {
                let diff = b[i] - a[i];
                if i == d {
                    let expected = f64::from(self.delta_signs[j]) * delta;
                    if (diff - expected).abs() > 1e-12 {
                        return Err(Error::InvalidInput(format!(
                            "step {j} moves dim {d} by {diff}, expected {expected}"
                        )));
                    }
                } else if diff != 0.0 {
                    return Err(Error::InvalidInput(format!("step {j} also moves dim {i}")));
                }
            }
        }
        Ok(())
    }
}

/// Sobol estimator blocks. `c[i]` is `b` with column `i` taken from `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolPlan {
    pub a: Vec<UnitPoint>,
    pub b: Vec<UnitPoint>,
    pub c: Vec<Vec<UnitPoint>>,
}

impl SobolPlan {
    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn k(&self) -> usize {
        self.c.len()
    }
}

/// A generated batch of hyperparameter points with its method-specific structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SamplePlan {
    Morris { p: usize, delta: f64, trajectories: Vec<Trajectory> },
    MorrisLhs { p: usize, delta: f64, trajectories: Vec<Trajectory> },
    Sobol(SobolPlan),
}

impl SamplePlan {
    pub fn method(&self) -> Method {
        match self {
            SamplePlan::Morris { .. } => Method::Morris,
            SamplePlan::MorrisLhs { .. } => Method::MorrisLhs,
            SamplePlan::Sobol(_) => Method::Sobol,
        }
    }

    /// All evaluation points in canonical order: trajectory-major for Morris,
    /// `A`, `B`, `C_0`, ..., `C_{k-1}` row blocks for Sobol.
    pub fn points(&self) -> Vec<UnitPoint> {
        match self {
            SamplePlan::Morris { trajectories, .. } | SamplePlan::MorrisLhs { trajectories, .. } => {
                trajectories.iter().flat_map(|t| t.points.iter().cloned()).collect()
            }
            SamplePlan::Sobol(plan) => plan
                .a
                .iter()
                .chain(&plan.b)
                .chain(plan.c.iter().flatten())
                .cloned()
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SamplePlan::Morris { trajectories, .. } | SamplePlan::MorrisLhs { trajectories, .. } => {
                trajectories.iter().map(|t| t.points.len()).sum()
            }
            SamplePlan::Sobol(plan) => plan.n() * (plan.k() + 2),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sizes requested for a plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanSizes {
    pub r: Option<usize>,
    pub p: Option<usize>,
    pub n: Option<usize>,
}

/// Auditable JSON form of a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleManifest {
    pub method: Method,
    pub seed: u64,
    pub k: usize,
    pub sizes: PlanSizes,
    pub total_points: usize,
    /// Morris-LHS starts are mapped onto grid levels (stratum i -> level i).
    pub lhs_snapped: bool,
    pub quasi_random: bool,
    pub plan: SamplePlan,
}

impl SampleManifest {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn check_morris_args(r: usize, p: usize) -> Result<f64> {
    if r == 0 {
        return Err(Error::Config("trajectory count r must be >= 1".into()));
    }
    grid_delta(p)
}

/// Builds a trajectory from starting levels, a dimension order and step signs.
fn walk(start_levels: &[usize], order: Vec<usize>, signs: Vec<i8>, p: usize) -> Trajectory {
    let steps = (p - 1) as f64;
    let jump = p / 2;
    let mut levels = start_levels.to_vec();
    let to_point = |lv: &[usize]| UnitPoint::from_vec_unchecked(lv.iter().map(|&l| l as f64 / steps).collect());
    let mut points = Vec::with_capacity(levels.len() + 1);
    points.push(to_point(&levels));
    let mut step_signs = Vec::with_capacity(order.len());
    for &d in &order {
        let s = signs[d];
        levels[d] = if s > 0 { levels[d] + jump } else { levels[d] - jump };
        step_signs.push(s);
        points.push(to_point(&levels));
    }
    Trajectory { points, moved_dim: order, delta_signs: step_signs }
}

const MAX_REDRAWS: usize = 64;

fn push_unique(out: &mut Vec<Trajectory>, mut draw: impl FnMut() -> Trajectory) {
    let mut t = draw();
    for _ in 0..MAX_REDRAWS {
        if !out.contains(&t) {
            break;
        }
        t = draw();
    }
    out.push(t);
}

/// Classic Morris OAT sampling on the `p`-level grid.
pub fn morris_sample(space: &HyperSpace, r: usize, p: usize, seed: u64) -> Result<SamplePlan> {
    let delta = check_morris_args(r, p)?;
    let k = space.k();
    let half = p / 2;
    let mut rng = seed::rng(seed);
    let mut trajectories = Vec::with_capacity(r);
    for _ in 0..r {
        push_unique(&mut trajectories, || {
            let signs: Vec<i8> = (0..k).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
            // +Δ needs level < p/2, -Δ needs level >= p/2.
            let start: Vec<usize> = signs
                .iter()
                .map(|&s| if s > 0 { rng.random_range(0..half) } else { rng.random_range(half..p) })
                .collect();
            let mut order: Vec<usize> = (0..k).collect();
            order.shuffle(&mut rng);
            walk(&start, order, signs, p)
        });
    }
    Ok(SamplePlan::Morris { p, delta, trajectories })
}

/// Morris sampling with Latin-hypercube stratified starting points.
///
/// Each dimension's `p` grid levels are the strata: every block of `p`
/// trajectories uses a fresh permutation of the levels per dimension, so each
/// level is hit exactly once per block. The step sign follows from the level.
pub fn morris_lhs_sample(space: &HyperSpace, r: usize, p: usize, seed: u64) -> Result<SamplePlan> {
    let delta = check_morris_args(r, p)?;
    let k = space.k();
    let half = p / 2;
    let mut rng = seed::rng(seed);
    let mut strata: Vec<Vec<usize>> = Vec::new();
    let mut trajectories = Vec::with_capacity(r);
    for t in 0..r {
        if t % p == 0 {
            strata = (0..k)
                .map(|_| {
                    let mut lv: Vec<usize> = (0..p).collect();
                    lv.shuffle(&mut rng);
                    lv
                })
                .collect();
        }
        let start: Vec<usize> = strata.iter().map(|lv| lv[t % p]).collect();
        let signs: Vec<i8> = start.iter().map(|&l| if l < half { 1 } else { -1 }).collect();
        push_unique(&mut trajectories, || {
            let mut order: Vec<usize> = (0..k).collect();
            order.shuffle(&mut rng);
            walk(&start, order, signs.clone(), p)
        });
    }
    Ok(SamplePlan::MorrisLhs { p, delta, trajectories })
}

/// Sobol/Saltelli sample with independent `A` and `B` blocks.
///
/// With `quasi_random` the blocks come from a randomly shifted Halton sequence
/// in `2k` dimensions instead of the PRNG.
pub fn sobol_sample(space: &HyperSpace, n: usize, seed: u64, quasi_random: bool) -> Result<SamplePlan> {
    if n < 2 {
        return Err(Error::Config(format!("Sobol base sample N must be >= 2, got {n}")));
    }
    let k = space.k();
    let mut rng = seed::rng(seed);
    let (a, b): (Vec<Vec<f64>>, Vec<Vec<f64>>) = if quasi_random {
        let shift: Vec<f64> = (0..2 * k).map(|_| rng.random::<f64>()).collect();
        let primes = first_primes(2 * k);
        (0..n)
            .map(|i| {
                let row: Vec<f64> = (0..2 * k)
                    .map(|d| (radical_inverse(i as u64 + 1, primes[d]) + shift[d]).fract())
                    .collect();
                (row[..k].to_vec(), row[k..].to_vec())
            })
            .unzip()
    } else {
        let draw = |rng: &mut seed::Rng| (0..n).map(|_| (0..k).map(|_| rng.random::<f64>()).collect()).collect();
        let a: Vec<Vec<f64>> = draw(&mut rng);
        let b: Vec<Vec<f64>> = draw(&mut rng);
        (a, b)
    };
    let c = (0..k)
        .map(|i| {
            a.iter()
                .zip(&b)
                .map(|(ra, rb)| {
                    let mut row = rb.clone();
                    row[i] = ra[i];
                    UnitPoint::from_vec_unchecked(row)
                })
                .collect()
        })
        .collect();
    Ok(SamplePlan::Sobol(SobolPlan {
        a: a.into_iter().map(UnitPoint::from_vec_unchecked).collect(),
        b: b.into_iter().map(UnitPoint::from_vec_unchecked).collect(),
        c,
    }))
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes: Vec<u64> = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while primes.len() < count {
        if primes.iter().take_while(|&&q| q * q <= candidate).all(|&q| candidate % q != 0) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut f, mut out) = (inv, 0.0);
    while i > 0 {
        out += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperspace::ParamSpec;
    use proptest::prelude::*;

    fn unit_space(k: usize) -> HyperSpace {
        HyperSpace::new((0..k).map(|i| ParamSpec::continuous(&format!("x{i}"), 0.0, 1.0)).collect()).unwrap()
    }

    #[test]
    fn preset_point_counts() {
        for (name, r, total) in [("cmaes", 50, 300), ("de", 50, 400)] {
            let s = HyperSpace::preset(name).unwrap();
            assert_eq!(morris_sample(&s, r, 10, 1).unwrap().len(), total);
            assert_eq!(morris_sample(&s, r, 10, 1).unwrap().points().len(), total);
        }
        for (name, r, total) in [("nsga3", 20, 140), ("moead", 20, 160)] {
            let s = HyperSpace::preset(name).unwrap();
            assert_eq!(morris_lhs_sample(&s, r, 10, 1).unwrap().points().len(), total);
        }
        let s = HyperSpace::preset("cmaes").unwrap();
        assert_eq!(sobol_sample(&s, 100, 1, false).unwrap().points().len(), 700);
        let s = HyperSpace::preset("moead").unwrap();
        assert_eq!(sobol_sample(&s, 30, 1, false).unwrap().points().len(), 270);
    }

    #[test]
    fn minimal_trajectory() {
        let plan = morris_sample(&unit_space(1), 1, 10, 3).unwrap();
        let pts = plan.points();
        assert_eq!(pts.len(), 2);
        assert!(((pts[1].coords()[0] - pts[0].coords()[0]).abs() - 10.0 / 18.0).abs() < 1e-12);
    }

    #[test]
    fn sobol_columns() {
        let plan = match sobol_sample(&unit_space(4), 16, 9, false).unwrap() {
            SamplePlan::Sobol(p) => p,
            _ => unreachable!(),
        };
        for (row, (ra, rb)) in plan.c[0].iter().zip(plan.a.iter().zip(&plan.b)) {
            assert_eq!(row.coords()[0], ra.coords()[0]);
            assert_eq!(&row.coords()[1..], &rb.coords()[1..]);
        }
        assert_ne!(plan.a, plan.b);
    }

    #[test]
    fn quasi_random_plan_is_in_cube() {
        let plan = sobol_sample(&unit_space(3), 64, 2, true).unwrap();
        assert_eq!(plan.len(), 64 * 5);
        assert!(plan.points().iter().flat_map(|p| p.coords().to_vec()).all(|c| (0.0..1.0).contains(&c)));
    }

    #[test]
    fn lhs_strata_hit_once() {
        for p in [2, 4, 10] {
            let plan = morris_lhs_sample(&unit_space(3), p, p, 11).unwrap();
            let SamplePlan::MorrisLhs { trajectories, .. } = plan else { unreachable!() };
            for d in 0..3 {
                let mut hits = vec![0; p];
                for t in &trajectories {
                    hits[(t.points[0].coords()[d] * (p - 1) as f64).round() as usize] += 1;
                }
                assert!(hits.iter().all(|&h| h == 1), "p={p} dim={d} hits={hits:?}");
            }
        }
        // r beyond p recycles strata
        let plan = morris_lhs_sample(&unit_space(2), 25, 4, 1).unwrap();
        assert_eq!(plan.len(), 75);
    }

    #[test]
    fn rejects_bad_sizes() {
        let s = unit_space(2);
        assert!(morris_sample(&s, 0, 10, 0).is_err());
        assert!(morris_sample(&s, 3, 9, 0).is_err());
        assert!(morris_lhs_sample(&s, 3, 1, 0).is_err());
        assert!(sobol_sample(&s, 1, 0, false).is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let s = HyperSpace::preset("de").unwrap();
        let plan = morris_lhs_sample(&s, 4, 10, 5).unwrap();
        let m = SampleManifest {
            method: plan.method(),
            seed: 5,
            k: s.k(),
            sizes: PlanSizes { r: Some(4), p: Some(10), n: None },
            total_points: plan.len(),
            lhs_snapped: true,
            quasi_random: false,
            plan,
        };
        assert_eq!(SampleManifest::from_json(&m.to_json().unwrap()).unwrap(), m);
    }

    proptest! {
        #[test]
        fn trajectories_obey_step_law(seed in any::<u64>(), k in 1usize..=10, pi in 0usize..3, lhs in any::<bool>()) {
            let p = [2, 4, 10][pi];
            let space = unit_space(k);
            let plan = if lhs { morris_lhs_sample(&space, 6, p, seed) } else { morris_sample(&space, 6, p, seed) }.unwrap();
            let (SamplePlan::Morris { trajectories, delta, .. } | SamplePlan::MorrisLhs { trajectories, delta, .. }) = plan else { unreachable!() };
            for t in &trajectories {
                prop_assert!(t.check(delta).is_ok(), "{:?}", t.check(delta));
                for pt in &t.points {
                    for &c in pt.coords() {
                        let level = c * (p - 1) as f64;
                        prop_assert!((0.0..=1.0).contains(&c));
                        prop_assert!((level - level.round()).abs() < 1e-9);
                    }
                }
            }
        }

        #[test]
        fn same_seed_same_plan(seed in any::<u64>()) {
            let space = HyperSpace::preset("nsga3").unwrap();
            prop_assert_eq!(morris_sample(&space, 5, 10, seed).unwrap(), morris_sample(&space, 5, 10, seed).unwrap());
            prop_assert_eq!(sobol_sample(&space, 8, seed, false).unwrap(), sobol_sample(&space, 8, seed, false).unwrap());
        }
    }
}

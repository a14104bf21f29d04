//! Benchmark problems: the single-objective suite (classic functions plus
//! shifted/rotated ones) and the three-objective DTLZ / WFG family.
//!
//! Problems are addressed by string id. Scalable members accept a `_n<dim>`
//! suffix, multi-objective ones `_m<obj>_n<dim>`, and transformed ones an
//! optional `_s<seed>` suffix, e.g. `rastrigin_n10`, `dtlz2_m3_n10`,
//! `shifted_rotated_rastrigin_n10_s7`.

mod classic;
mod moo;
mod transform;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moo::das_dennis_points;

pub use transform::ShiftRotate;

/// Default dimension of scalable single-objective problems.
pub const DEFAULT_SOO_DIM: usize = 30;

type ObjectiveFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// Analytic Pareto front geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontShape {
    /// `sum f = 0.5`
    LinearSimplex,
    /// unit sphere octant
    Sphere,
    /// `f_i = (1 - w_i) / 2` over the unit simplex
    InvertedSimplex,
    /// `f = 1 - s`, `s` on the unit sphere octant
    InvertedSphere,
    /// sphere octant with coordinates raised to 4 (last one to 2)
    ConvexSphere,
    /// WFG3 degenerate line, scaled by `2m`
    WfgDegenerateLine,
    /// sphere octant scaled by `2m`
    WfgConcave,
}

/// A bounded benchmark problem.
#[derive(Clone)]
pub struct Problem {
    id: String,
    dim: usize,
    bounds: Vec<(f64, f64)>,
    n_obj: usize,
    objective: Arc<ObjectiveFn>,
    optimum: Option<f64>,
    front: Option<FrontShape>,
    transform_seed: Option<u64>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("n_obj", &self.n_obj)
            .finish_non_exhaustive()
    }
}

/// Objective values plus whether the input had to be clamped into the box.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated<T> {
    pub value: T,
    pub clamped: bool,
}

/// Manifest entry describing one preset problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInfo {
    pub id: String,
    pub dim: usize,
    pub objectives: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub optimum: Option<f64>,
    pub transform_seed: Option<u64>,
    pub front: Option<FrontShape>,
    pub hv_reference: Option<Vec<f64>>,
}

impl Problem {
    pub(crate) fn single(
        id: String,
        bounds: Vec<(f64, f64)>,
        optimum: Option<f64>,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            id,
            dim: bounds.len(),
            bounds,
            n_obj: 1,
            objective: Arc::new(move |x, out| out[0] = f(x)),
            optimum,
            front: None,
            transform_seed: None,
        }
    }

    pub(crate) fn multi(
        id: String,
        bounds: Vec<(f64, f64)>,
        n_obj: usize,
        front: FrontShape,
        f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            id,
            dim: bounds.len(),
            bounds,
            n_obj,
            objective: Arc::new(f),
            optimum: None,
            front: Some(front),
            transform_seed: None,
        }
    }

    /// Looks a problem up by id.
    pub fn by_id(id: &str) -> Result<Self> {
        let parsed = ParsedId::parse(id);
        if let Some(p) = moo::build(&parsed)? {
            return Ok(p);
        }
        if let Some(p) = transform::build(&parsed)? {
            return Ok(p);
        }
        if let Some(p) = classic::build(&parsed)? {
            return Ok(p);
        }
        Err(Error::UnknownProblem(id.to_owned()))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_obj(&self) -> usize {
        self.n_obj
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn optimum(&self) -> Option<f64> {
        self.optimum
    }

    pub fn front_shape(&self) -> Option<&FrontShape> {
        self.front.as_ref()
    }

    pub fn transform_seed(&self) -> Option<u64> {
        self.transform_seed
    }

    pub fn is_multi_objective(&self) -> bool {
        self.n_obj > 1
    }

    /// Clamps `x` into the box in place, returning whether anything moved.
    pub fn clamp(&self, x: &mut [f64]) -> bool {
        let mut moved = false;
        for (v, &(lo, hi)) in x.iter_mut().zip(&self.bounds) {
            let c = v.clamp(lo, hi);
            moved |= c != *v;
            *v = c;
        }
        moved
    }

    /// Evaluates an in-bounds point without checks; `out` must hold `n_obj` values.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        (self.objective)(x, out)
    }

    /// Evaluates any point of the right dimension, clamping it into the box first.
    pub fn evaluate(&self, x: &[f64]) -> Result<Evaluated<Vec<f64>>> {
        if x.len() != self.dim {
            return Err(Error::Shape { expected: self.dim, got: x.len() });
        }
        let mut xc = x.to_vec();
        let clamped = self.clamp(&mut xc);
        let mut out = vec![0.0; self.n_obj];
        self.eval_into(&xc, &mut out);
        Ok(Evaluated { value: out, clamped })
    }

    pub fn evaluate_soo(&self, x: &[f64]) -> Result<Evaluated<f64>> {
        if self.n_obj != 1 {
            return Err(Error::Unsupported(format!("`{}` has {} objectives", self.id, self.n_obj)));
        }
        let e = self.evaluate(x)?;
        Ok(Evaluated { value: e.value[0], clamped: e.clamped })
    }

    pub fn evaluate_moo(&self, x: &[f64]) -> Result<Evaluated<Vec<f64>>> {
        if self.n_obj < 2 {
            return Err(Error::Unsupported(format!("`{}` is single-objective", self.id)));
        }
        self.evaluate(x)
    }

    /// Points on the analytic Pareto front.
    ///
    /// Uses the largest simplex lattice with at most `count` points (a single
    /// centroid when `count < m`), so `count = 91` gives the 12-division
    /// lattice for three objectives. The degenerate WFG3 line is sampled at
    /// `count` evenly spaced positions.
    pub fn sample_true_front(&self, count: usize) -> Result<Vec<Vec<f64>>> {
        let shape = self
            .front
            .as_ref()
            .ok_or_else(|| Error::Unsupported(format!("`{}` has no known Pareto front", self.id)))?;
        if count == 0 {
            return Err(Error::InvalidInput("front sample count must be >= 1".into()));
        }
        let m = self.n_obj;
        if *shape == FrontShape::WfgDegenerateLine {
            let ts: Vec<f64> = if count == 1 {
                vec![0.5]
            } else {
                (0..count).map(|i| i as f64 / (count - 1) as f64).collect()
            };
            return Ok(ts.into_iter().map(|t| moo::wfg_line_point(t, m)).collect());
        }
        let weights = if count < m {
            vec![vec![1.0 / m as f64; m]]
        } else {
            let mut h = 1;
            while binomial(h + 1 + m - 1, m - 1) <= count {
                h += 1;
            }
            das_dennis_points(m, h)?
        };
        Ok(weights.iter().map(|w| moo::front_point(shape, w)).collect())
    }

    /// HV reference point: componentwise nadir of the true front times 1.1.
    pub fn hv_reference(&self) -> Option<Vec<f64>> {
        self.front.as_ref().map(|s| moo::front_nadir(s, self.n_obj).into_iter().map(|v| v * 1.1).collect())
    }

    pub fn info(&self) -> ProblemInfo {
        ProblemInfo {
            id: self.id.clone(),
            dim: self.dim,
            objectives: self.n_obj,
            lower: self.bounds.iter().map(|b| b.0).collect(),
            upper: self.bounds.iter().map(|b| b.1).collect(),
            optimum: self.optimum,
            transform_seed: self.transform_seed,
            front: self.front.clone(),
            hv_reference: self.hv_reference(),
        }
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Ids of the 33-problem single-objective suite.
pub fn soo_suite() -> Vec<String> {
    classic::NAMES.iter().chain(transform::NAMES.iter()).map(|s| s.to_string()).collect()
}

/// Ids of the 10-problem three-objective suite (`n = 10`).
pub fn moo_suite() -> Vec<String> {
    moo::NAMES.iter().map(|s| format!("{s}_m3_n10")).collect()
}

/// A problem id split into base name and optional suffixes.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ParsedId {
    pub base: String,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub raw: String,
}

impl ParsedId {
    fn parse(id: &str) -> Self {
        let mut parts: Vec<&str> = id.split('_').collect();
        let (mut m, mut n, mut seed) = (None, None, None);
        while parts.len() > 1 {
            let last = parts[parts.len() - 1];
            let num = |prefix: char| last.strip_prefix(prefix).and_then(|d| d.parse::<u64>().ok());
            if let (Some(v), None) = (num('n'), n) {
                n = Some(v as usize);
            } else if let (Some(v), None) = (num('m'), m) {
                m = Some(v as usize);
            } else if let (Some(v), None) = (num('s'), seed) {
                seed = Some(v);
            } else {
                break;
            }
            parts.pop();
        }
        Self { base: parts.join("_"), m, n, seed, raw: id.to_owned() }
    }
}

//! Performance scores: best value for single-objective runs, GD / IGD / HV on
//! the non-dominated union of all generations for multi-objective runs.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moo::{nondominated_unique, ParetoArchive};
use crate::problems::Problem;
use crate::soo::RunResult;

/// Reference-front size used for GD / IGD (12 divisions for three objectives).
pub const FRONT_SAMPLES: usize = 91;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Best,
    Gd,
    Igd,
    Hv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Minimize,
    Maximize,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Best, Metric::Gd, Metric::Igd, Metric::Hv];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Best => "best",
            Metric::Gd => "gd",
            Metric::Igd => "igd",
            Metric::Hv => "hv",
        }
    }

    pub fn orientation(self) -> Orientation {
        match self {
            Metric::Hv => Orientation::Maximize,
            _ => Orientation::Minimize,
        }
    }

    pub fn is_multi_objective(self) -> bool {
        self != Metric::Best
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown metric `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub metric: Metric,
    pub value: f64,
    pub orientation: Orientation,
}

impl MetricValue {
    pub fn new(metric: Metric, value: f64) -> Self {
        Self { metric, value, orientation: metric.orientation() }
    }
}

fn check_sets(a: &[Vec<f64>], z: &[Vec<f64>], name: &str) -> Result<()> {
    if a.is_empty() || z.is_empty() {
        return Err(Error::UndefinedMetric(format!("{name} needs non-empty sets")));
    }
    let m = z[0].len();
    if let Some(bad) = a.iter().chain(z).find(|p| p.len() != m) {
        return Err(Error::Shape { expected: m, got: bad.len() });
    }
    Ok(())
}

fn nearest(p: &[f64], set: &[Vec<f64>]) -> f64 {
    set.iter()
        .map(|q| p.iter().zip(q).map(|(x, y)| (x - y).powi(2)).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

/// `sqrt(sum d_i^2) / |A|`, `d_i` the distance of `a_i` to its nearest reference point.
pub fn gd(a: &[Vec<f64>], z: &[Vec<f64>]) -> Result<f64> {
    check_sets(a, z, "gd")?;
    let s: f64 = a.iter().map(|p| nearest(p, z).powi(2)).sum();
    Ok(s.sqrt() / a.len() as f64)
}

/// Mean distance from each reference point to its nearest point of `A`.
pub fn igd(a: &[Vec<f64>], z: &[Vec<f64>]) -> Result<f64> {
    check_sets(a, z, "igd")?;
    Ok(z.iter().map(|p| nearest(p, a)).sum::<f64>() / z.len() as f64)
}

/// Exact hypervolume dominated by `a` and bounded by `r` (minimization).
/// Points that do not strictly dominate `r` contribute nothing.
pub fn hv(a: &[Vec<f64>], r: &[f64]) -> Result<f64> {
    if let Some(bad) = a.iter().find(|p| p.len() != r.len()) {
        return Err(Error::Shape { expected: r.len(), got: bad.len() });
    }
    if r.is_empty() {
        return Err(Error::UndefinedMetric("hv needs at least one objective".into()));
    }
    let inside: Vec<Vec<f64>> = a.iter().filter(|p| p.iter().zip(r).all(|(x, y)| x < y)).cloned().collect();
    if inside.is_empty() {
        return Ok(0.0);
    }
    Ok(hv_rec(nondominated_unique(&inside), r))
}

/// True when some coordinate of `r` does not exceed the best value of that
/// objective over `a`, so the whole set contributes zero volume.
pub fn hv_reference_degenerate(a: &[Vec<f64>], r: &[f64]) -> bool {
    (0..r.len()).any(|j| a.iter().all(|p| p[j] >= r[j]))
}

fn hv_rec(mut pts: Vec<Vec<f64>>, r: &[f64]) -> f64 {
    let m = r.len();
    match m {
        1 => r[0] - pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min),
        2 => {
            pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
            let mut vol = 0.0;
            let mut ceiling = r[1];
            for p in &pts {
                if p[1] < ceiling {
                    vol += (r[0] - p[0]) * (ceiling - p[1]);
                    ceiling = p[1];
                }
            }
            vol
        }
        3 => hv3(pts, r),
        _ => {
            // sweep the last objective, measuring (m-1)-dimensional slices
            pts.sort_by(|a, b| a[m - 1].total_cmp(&b[m - 1]));
            let mut vol = 0.0;
            let mut slice: Vec<Vec<f64>> = Vec::with_capacity(pts.len());
            for i in 0..pts.len() {
                slice.push(pts[i][..m - 1].to_vec());
                let top = if i + 1 < pts.len() { pts[i + 1][m - 1] } else { r[m - 1] };
                let depth = top - pts[i][m - 1];
                if depth > 0.0 {
                    slice = nondominated_unique(&slice);
                    vol += depth * hv_rec(slice.clone(), &r[..m - 1]);
                }
            }
            vol
        }
    }
}

/// Dimension sweep over the third objective, keeping the 2-D staircase of the
/// points seen so far and its dominated area up to date in `O(log n)` per point.
fn hv3(mut pts: Vec<Vec<f64>>, r: &[f64]) -> f64 {
    pts.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut stair: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    let (mut area, mut vol) = (0.0, 0.0);
    for i in 0..pts.len() {
        area += stair_insert(&mut stair, pts[i][0], pts[i][1], r);
        let top = if i + 1 < pts.len() { pts[i + 1][2] } else { r[2] };
        vol += area * (top - pts[i][2]);
    }
    vol
}

/// Order-preserving map from finite floats to integers.
fn ord_key(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 { !b } else { b | (1 << 63) }
}

/// Inserts `(x, y)` into a non-dominated staircase, returning the area gained.
fn stair_insert(stair: &mut BTreeMap<u64, (f64, f64)>, x: f64, y: f64, r: &[f64]) -> f64 {
    let k = ord_key(x);
    let pred = stair.range(..k).next_back().map(|(_, &p)| p);
    if pred.is_some_and(|p| p.1 <= y) || stair.get(&k).is_some_and(|q| q.1 <= y) {
        return 0.0;
    }
    let mut h = pred.map_or(r[1], |p| p.1);
    let mut cur = x;
    let mut gained = 0.0;
    let mut covered = Vec::new();
    let mut open = true;
    for (&kq, &(qx, qy)) in stair.range(k..) {
        gained += (qx - cur) * (h - y);
        if qy < y {
            open = false;
            break;
        }
        covered.push(kq);
        h = qy;
        cur = qx;
    }
    if open {
        gained += (r[0] - cur) * (h - y);
    }
    for kq in covered {
        stair.remove(&kq);
    }
    stair.insert(k, (x, y));
    gained
}

/// Best-so-far value of a single-objective run.
pub fn score_best(run: &RunResult) -> MetricValue {
    let best = run.history.iter().copied().fold(f64::INFINITY, f64::min);
    MetricValue::new(Metric::Best, best.min(run.best_value))
}

/// Reference data a multi-objective metric is measured against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceData {
    pub front: Vec<Vec<f64>>,
    pub hv_reference: Vec<f64>,
}

impl ReferenceData {
    pub fn for_problem(problem: &Problem) -> Result<Self> {
        let front = problem.sample_true_front(FRONT_SAMPLES)?;
        let hv_reference = problem
            .hv_reference()
            .ok_or_else(|| Error::Unsupported(format!("`{}` has no hypervolume reference", problem.id())))?;
        Ok(Self { front, hv_reference })
    }
}

/// Scores the non-dominated, de-duplicated union of all generations.
pub fn score_archive(archive: &ParetoArchive, metric: Metric, reference: &ReferenceData) -> Result<MetricValue> {
    let nd = archive.nondominated();
    score_front(&nd, metric, reference)
}

/// Scores an already filtered front.
pub fn score_front(front: &[Vec<f64>], metric: Metric, reference: &ReferenceData) -> Result<MetricValue> {
    let value = match metric {
        Metric::Gd => gd(front, &reference.front)?,
        Metric::Igd => igd(front, &reference.front)?,
        Metric::Hv => hv(front, &reference.hv_reference)?,
        Metric::Best => return Err(Error::Unsupported("`best` applies to single-objective runs".into())),
    };
    Ok(MetricValue::new(metric, value))
}

/// Arithmetic mean over runs.
pub fn run_average(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::UndefinedMetric("no runs to average".into()));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

//! Pure post-processing: cross-problem aggregation, score curves, rankings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indices::{morris_mu_sigma, sobol_indices, EEMatrix, SensitivityReport, SobolEstimator};
use crate::metrics::Metric;
use crate::sampling::SamplePlan;

use super::config::Aggregation;

/// Min-max rescaling that keeps non-finite entries as `NaN`; all-equal input maps to 0.
pub fn normalize_minmax(values: &[f64]) -> Vec<f64> {
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|&v| {
            if !v.is_finite() {
                f64::NAN
            } else if hi > lo {
                (v - lo) / (hi - lo)
            } else {
                0.0
            }
        })
        .collect()
}

/// Average ranks of the finite entries scaled into `[0,1]`.
pub fn normalize_rank(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_finite()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let m = idx.len();
    let mut out = vec![f64::NAN; values.len()];
    let mut i = 0;
    while i < m {
        let mut j = i;
        while j + 1 < m && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0;
        for &t in &idx[i..=j] {
            out[t] = if m > 1 { avg / (m - 1) as f64 } else { 0.0 };
        }
        i = j + 1;
    }
    out
}

/// Per-sample model output: each problem's scores are normalized across
/// samples, then averaged over problems in id order. A sample with any
/// non-finite problem score gets `NaN`.
pub fn aggregate(per_problem: &BTreeMap<String, Vec<f64>>, mode: Aggregation) -> Vec<f64> {
    let n = per_problem.values().next().map_or(0, Vec::len);
    let normalized: Vec<Vec<f64>> = per_problem
        .values()
        .map(|v| match mode {
            Aggregation::Minmax => normalize_minmax(v),
            Aggregation::Rank => normalize_rank(v),
        })
        .collect();
    (0..n)
        .map(|s| normalized.iter().map(|v| v[s]).sum::<f64>() / normalized.len() as f64)
        .collect()
}

/// Indices for one vector of model outputs laid out like `plan.points()`.
pub fn analyze_plan(plan: &SamplePlan, params: Vec<String>, y: &[f64], estimator: SobolEstimator) -> Result<SensitivityReport> {
    if y.len() != plan.len() {
        return Err(Error::Shape { expected: plan.len(), got: y.len() });
    }
    match plan {
        SamplePlan::Morris { delta, trajectories, .. } | SamplePlan::MorrisLhs { delta, trajectories, .. } => {
            let k1 = params.len() + 1;
            let outputs: Vec<Vec<f64>> = y.chunks(k1).map(<[f64]>::to_vec).collect();
            let ee = EEMatrix::from_trajectories(trajectories, &outputs, *delta)?;
            let stats = morris_mu_sigma(&ee)?;
            SensitivityReport::from_morris(plan.method(), params, &stats, ee.dropped)
        }
        SamplePlan::Sobol(p) => {
            let n = p.n();
            let yc: Vec<Vec<f64>> = (0..p.k()).map(|i| y[(2 + i) * n..(3 + i) * n].to_vec()).collect();
            let idx = sobol_indices(&y[..n], &y[n..2 * n], &yc, estimator)?;
            SensitivityReport::from_sobol(params, &idx)
        }
    }
}

/// Mean score per bin of one hyperparameter, with Gaussian smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedCurve {
    pub param: String,
    pub metric: Metric,
    pub bins: usize,
    pub sigma: f64,
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub means: Vec<f64>,
    pub smoothed: Vec<f64>,
    /// Bins without samples, filled from their neighbours.
    pub interpolated: Vec<bool>,
}

impl BinnedCurve {
    pub fn to_csv_string(&self) -> Result<String> {
        use crate::util::fmt_f64;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["param", "metric", "bins", "sigma", "bin", "lower", "upper", "count", "mean", "smoothed", "interpolated"])?;
        for b in 0..self.bins {
            w.write_record([
                self.param.clone(),
                self.metric.as_str().to_string(),
                self.bins.to_string(),
                fmt_f64(self.sigma),
                b.to_string(),
                fmt_f64(self.edges[b]),
                fmt_f64(self.edges[b + 1]),
                self.counts[b].to_string(),
                fmt_f64(self.means[b]),
                fmt_f64(self.smoothed[b]),
                u8::from(self.interpolated[b]).to_string(),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?).expect("utf-8"))
    }
}

/// Sorts `(x, score)` pairs into `bins` equal-width bins over `domain`,
/// averages each bin and smooths the result. Non-finite scores are ignored.
pub fn bin_scores(
    param: &str,
    metric: Metric,
    xs: &[f64],
    scores: &[f64],
    domain: (f64, f64),
    bins: usize,
    sigma: f64,
) -> Result<BinnedCurve> {
    if bins < 2 {
        return Err(Error::InvalidInput("bins must be >= 2".into()));
    }
    if xs.len() != scores.len() {
        return Err(Error::Shape { expected: xs.len(), got: scores.len() });
    }
    let (lo, hi) = domain;
    let width = (hi - lo) / bins as f64;
    let mut sums = vec![0.0; bins];
    let mut counts = vec![0usize; bins];
    for (&x, &s) in xs.iter().zip(scores) {
        if !s.is_finite() {
            continue;
        }
        let b = if width > 0.0 { (((x - lo) / width).floor().max(0.0) as usize).min(bins - 1) } else { 0 };
        sums[b] += s;
        counts[b] += 1;
    }
    let filled: Vec<usize> = (0..bins).filter(|&b| counts[b] > 0).collect();
    if filled.is_empty() {
        return Err(Error::InvalidInput("no finite scores to bin".into()));
    }
    let mut means: Vec<f64> = (0..bins).map(|b| if counts[b] > 0 { sums[b] / counts[b] as f64 } else { f64::NAN }).collect();
    let interpolated: Vec<bool> = counts.iter().map(|&c| c == 0).collect();
    for b in 0..bins {
        if counts[b] > 0 {
            continue;
        }
        let left = filled.iter().rev().find(|&&f| f < b).copied();
        let right = filled.iter().find(|&&f| f > b).copied();
        means[b] = match (left, right) {
            (Some(l), Some(r)) => {
                let t = (b - l) as f64 / (r - l) as f64;
                means[l] + t * (means[r] - means[l])
            }
            (Some(l), None) => means[l],
            (None, Some(r)) => means[r],
            (None, None) => unreachable!(),
        };
    }
    let smoothed = gaussian_filter1d(&means, sigma);
    let edges = (0..=bins).map(|b| if b == bins { hi } else { lo + b as f64 * width }).collect();
    Ok(BinnedCurve { param: param.to_string(), metric, bins, sigma, edges, counts, means, smoothed, interpolated })
}

/// 1-D Gaussian filter with mirrored boundaries and a kernel truncated at 4 sigma.
pub fn gaussian_filter1d(x: &[f64], sigma: f64) -> Vec<f64> {
    let n = x.len() as isize;
    let radius = (4.0 * sigma + 0.5) as isize;
    if sigma <= 0.0 || radius == 0 || n == 0 {
        return x.to_vec();
    }
    let w: Vec<f64> = (-radius..=radius).map(|i| (-0.5 * (i * i) as f64 / (sigma * sigma)).exp()).collect();
    let total: f64 = w.iter().sum();
    // half-sample symmetric reflection: d c b a | a b c d | d c b a
    let at = |mut i: isize| {
        let period = 2 * n;
        i = i.rem_euclid(period);
        if i >= n {
            i = period - 1 - i;
        }
        x[i as usize]
    };
    (0..n)
        .map(|i| (-radius..=radius).zip(&w).map(|(o, wi)| wi * at(i + o)).sum::<f64>() / total)
        .collect()
}

/// Borda points (k-1 for first place, 0 for last) summed over reports, and
/// the consolidated order: most points first, ties by parameter order.
pub fn borda(reports: &[&SensitivityReport]) -> Result<(Vec<usize>, Vec<f64>)> {
    let first = reports.first().ok_or_else(|| Error::InvalidInput("no reports to rank".into()))?;
    let k = first.params.len();
    let mut points = vec![0.0; k];
    for r in reports {
        if r.params != first.params {
            return Err(Error::InvalidInput("reports disagree on parameters".into()));
        }
        for (pos, &i) in r.ranking.iter().enumerate() {
            points[i] += (k - 1 - pos) as f64;
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| points[b].total_cmp(&points[a]).then(a.cmp(&b)));
    Ok((order, points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Method;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn report(direct: &[f64]) -> SensitivityReport {
        let params = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        SensitivityReport::build(Method::Morris, params, direct.to_vec(), Some(vec![0.0; 3])).unwrap()
    }

    #[test]
    fn borda_examples() {
        let a = report(&[3.0, 2.0, 1.0]);
        let b = report(&[2.0, 3.0, 1.0]);
        assert_eq!(borda(&[&a]).unwrap().0, a.ranking);
        assert_eq!(borda(&[&a, &a]).unwrap().0, a.ranking);
        let (order, points) = borda(&[&a, &b]).unwrap();
        assert_eq!(order, vec![0, 1, 2]);
        assert_eq!(points, vec![3.0, 3.0, 0.0]);
        let (order, _) = borda(&[&b, &a]).unwrap();
        assert_eq!(order, vec![0, 1, 2]);
    }

    #[test]
    fn bins_constant_and_halves() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
        let c = bin_scores("x", Metric::Best, &xs, &vec![0.7; 100], (0.0, 1.0), 10, 2.0).unwrap();
        for (&m, &s) in c.means.iter().zip(&c.smoothed) {
            assert_abs_diff_eq!(m, 0.7, epsilon = 1e-12);
            assert_abs_diff_eq!(s, 0.7, epsilon = 1e-12);
        }
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let c = bin_scores("x", Metric::Best, &xs, &ys, (0.0, 1.0), 2, 0.0).unwrap();
        let half = |r: std::ops::Range<usize>| ys[r.clone()].iter().sum::<f64>() / r.len() as f64;
        assert_abs_diff_eq!(c.means[0], half(0..50), epsilon = 1e-12);
        assert_abs_diff_eq!(c.means[1], half(50..100), epsilon = 1e-12);
    }

    #[test]
    fn linear_ramp_stays_monotone() {
        let xs: Vec<f64> = (0..500).map(|i| i as f64 / 499.0 * 10.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let c = bin_scores("x", Metric::Best, &xs, &ys, (0.0, 10.0), 50, 2.0).unwrap();
        assert!(c.smoothed.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(c.smoothed.len(), 50);
    }

    #[test]
    fn empty_bins_are_interpolated() {
        let c = bin_scores("x", Metric::Best, &[0.05, 0.95], &[1.0, 3.0], (0.0, 1.0), 5, 0.0).unwrap();
        assert_eq!(c.interpolated, vec![false, true, true, true, false]);
        assert_abs_diff_eq!(c.means[2], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_matches_reference() {
        // scipy.ndimage.gaussian_filter1d([0,0,1,0,0,0], 1.0)
        let out = gaussian_filter1d(&[0.0, 0.0, 1.0, 0.0, 0.0, 0.0], 1.0);
        let expect = [0.05842299, 0.24210528, 0.39894347, 0.24197145, 0.05399113, 0.00456569];
        for (a, b) in out.iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-7);
        }
    }

    #[test]
    fn rank_normalization_ties() {
        assert_eq!(normalize_rank(&[3.0, 1.0, 3.0, f64::NAN, 2.0])[..3], [5.0 / 6.0, 0.0, 5.0 / 6.0]);
    }

    proptest! {
        #[test]
        fn aggregate_ignores_problem_order(vals in proptest::collection::vec(proptest::collection::vec(-1e3f64..1e3, 6), 1..5)) {
            let named: Vec<(String, Vec<f64>)> = vals.iter().enumerate().map(|(i, v)| (format!("p{i}"), v.clone())).collect();
            let fwd: BTreeMap<_, _> = named.iter().cloned().collect();
            let rev: BTreeMap<_, _> = named.iter().rev().cloned().collect();
            prop_assert_eq!(aggregate(&fwd, Aggregation::Minmax), aggregate(&rev, Aggregation::Minmax));
            for y in aggregate(&fwd, Aggregation::Rank) {
                prop_assert!((0.0..=1.0).contains(&y));
            }
        }
    }
}

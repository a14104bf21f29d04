//! Elementary-effects statistics, Sobol indices, normalization and ranking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{Method, Trajectory};
use crate::util::fmt_f64;

/// Elementary effects of one trajectory, one per hyperparameter.
///
/// Step `j` moves dimension `d` by `sign * delta`; the effect is the forward
/// difference quotient along `+delta`.
pub fn elementary_effects(traj: &Trajectory, y: &[f64], delta: f64) -> Result<Vec<f64>> {
    let k = traj.k();
    if y.len() != k + 1 {
        return Err(Error::Shape { expected: k + 1, got: y.len() });
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
    }
    if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite model output {bad}")));
    }
    let mut ee = vec![0.0; k];
    for (j, (&d, &s)) in traj.moved_dim.iter().zip(&traj.delta_signs).enumerate() {
        ee[d] = f64::from(s) * (y[j + 1] - y[j]) / delta;
    }
    Ok(ee)
}

/// `r x k` matrix of elementary effects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EEMatrix {
    pub values: Vec<Vec<f64>>,
    pub k: usize,
    /// Trajectories dropped because of non-finite outputs.
    pub dropped: usize,
}

impl EEMatrix {
    /// Builds the matrix, dropping any trajectory with a non-finite output.
    pub fn from_trajectories(trajectories: &[Trajectory], outputs: &[Vec<f64>], delta: f64) -> Result<Self> {
        if trajectories.len() != outputs.len() {
            return Err(Error::Shape { expected: trajectories.len(), got: outputs.len() });
        }
        let k = trajectories.first().map_or(0, Trajectory::k);
        let mut values = Vec::with_capacity(trajectories.len());
        let mut dropped = 0;
        for (t, y) in trajectories.iter().zip(outputs) {
            if y.iter().any(|v| !v.is_finite()) {
                dropped += 1;
                continue;
            }
            values.push(elementary_effects(t, y, delta)?);
        }
        Ok(Self { values, k, dropped })
    }

    pub fn r(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorrisStats {
    pub mu: Vec<f64>,
    /// `None` when only one trajectory is available.
    pub sigma: Option<Vec<f64>>,
    pub mu_star: Vec<f64>,
}

/// Mean, sample standard deviation (divisor `r - 1`) and mean absolute value
/// of each column of elementary effects.
pub fn morris_mu_sigma(ee: &EEMatrix) -> Result<MorrisStats> {
    let r = ee.r();
    if r == 0 {
        return Err(Error::InvalidInput("no usable trajectories".into()));
    }
    let k = ee.k;
    let col = |i: usize| ee.values.iter().map(move |row| row[i]);
    let mu: Vec<f64> = (0..k).map(|i| col(i).sum::<f64>() / r as f64).collect();
    let mu_star = (0..k).map(|i| col(i).map(f64::abs).sum::<f64>() / r as f64).collect();
    let sigma = (r >= 2).then(|| {
        (0..k)
            .map(|i| (col(i).map(|v| (v - mu[i]).powi(2)).sum::<f64>() / (r - 1) as f64).sqrt())
            .collect()
    });
    Ok(MorrisStats { mu, sigma, mu_star })
}

/// Sobol estimator variant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SobolEstimator {
    /// Dot-product form with `f0^2` from the `A` outputs.
    #[default]
    Saltelli,
    Jansen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolIndices {
    pub s: Vec<f64>,
    pub st: Vec<f64>,
    pub s_clamped: Vec<f64>,
    pub st_clamped: Vec<f64>,
    /// Rows dropped from every block because some output was non-finite.
    pub dropped: usize,
}

/// First-order and total-effect indices from outputs on `A`, `B` and every `C_i`.
pub fn sobol_indices(ya: &[f64], yb: &[f64], yc: &[Vec<f64>], estimator: SobolEstimator) -> Result<SobolIndices> {
    let n = ya.len();
    if yb.len() != n {
        return Err(Error::Shape { expected: n, got: yb.len() });
    }
    if let Some(bad) = yc.iter().find(|c| c.len() != n) {
        return Err(Error::Shape { expected: n, got: bad.len() });
    }
    // Drop a row index across every block so the estimators stay paired.
    let keep: Vec<usize> = (0..n)
        .filter(|&j| ya[j].is_finite() && yb[j].is_finite() && yc.iter().all(|c| c[j].is_finite()))
        .collect();
    let m = keep.len() as f64;
    let degenerate = || Error::DegenerateModel { metric: String::new(), problem: String::new() };
    if keep.len() < 2 {
        return Err(degenerate());
    }
    let mean = |f: &dyn Fn(usize) -> f64| keep.iter().map(|&j| f(j)).sum::<f64>() / m;
    let f0 = mean(&|j| ya[j]);
    let f0_sq = f0 * f0;
    let var = mean(&|j| ya[j] * ya[j]) - f0_sq;
    if !(var > 1e-300) || (var / mean(&|j| ya[j] * ya[j]).max(f64::MIN_POSITIVE)) < 1e-14 {
        return Err(degenerate());
    }
    let (s, st): (Vec<f64>, Vec<f64>) = yc
        .iter()
        .map(|c| match estimator {
            SobolEstimator::Saltelli => {
                let s = (mean(&|j| ya[j] * c[j]) - f0_sq) / var;
                let st = 1.0 - (mean(&|j| yb[j] * c[j]) - f0_sq) / var;
                (s, st)
            }
            SobolEstimator::Jansen => {
                let s = (var - 0.5 * mean(&|j| (ya[j] - c[j]).powi(2))) / var;
                let st = 0.5 * mean(&|j| (yb[j] - c[j]).powi(2)) / var;
                (s, st)
            }
        })
        .unzip();
    Ok(SobolIndices {
        s_clamped: s.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
        st_clamped: st.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
        s,
        st,
        dropped: n - keep.len(),
    })
}

/// Per-hyperparameter indices of one (method, metric) analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub method: Method,
    pub params: Vec<String>,
    /// `mu` for Morris, `S` for Sobol.
    pub direct: Vec<f64>,
    /// `sigma` for Morris, `ST` for Sobol. `NaN` when undefined (Morris with r = 1).
    pub interaction: Vec<f64>,
    pub direct_norm: Vec<f64>,
    pub interaction_norm: Vec<f64>,
    /// Parameter indices, most influential first.
    pub ranking: Vec<usize>,
    /// `interaction - direct` per parameter.
    pub gap: Vec<f64>,
    pub direct_range: (f64, f64),
    pub interaction_range: (f64, f64),
    pub mu_star: Option<Vec<f64>>,
    pub direct_clamped: Option<Vec<f64>>,
    pub interaction_clamped: Option<Vec<f64>>,
    pub dropped: usize,
}

/// Min-max rescaling into `[0,1]`; all-equal input maps to zeros.
pub fn min_max(values: &[f64]) -> (Vec<f64>, (f64, f64)) {
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let norm = values
        .iter()
        .map(|&v| if span > 0.0 && v.is_finite() { ((v - lo) / span).clamp(0.0, 1.0) } else { 0.0 })
        .collect();
    (norm, (lo, hi))
}

const RANK_TIE_EPS: f64 = 1e-12;

/// Orders parameters by descending `direct_norm + interaction_norm`, ties by index.
pub fn rank_by_sum(direct_norm: &[f64], interaction_norm: &[f64]) -> Vec<usize> {
    let sums: Vec<f64> = direct_norm.iter().zip(interaction_norm).map(|(a, b)| a + b).collect();
    let mut order: Vec<usize> = (0..sums.len()).collect();
    order.sort_by(|&a, &b| {
        if (sums[a] - sums[b]).abs() <= RANK_TIE_EPS {
            a.cmp(&b)
        } else {
            sums[b].total_cmp(&sums[a])
        }
    });
    order
}

impl SensitivityReport {
    /// Normalizes raw indices and ranks the parameters.
    pub fn build(method: Method, params: Vec<String>, direct: Vec<f64>, interaction: Option<Vec<f64>>) -> Result<Self> {
        let k = params.len();
        if direct.len() != k {
            return Err(Error::Shape { expected: k, got: direct.len() });
        }
        if let Some(bad) = direct.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite direct index {bad}")));
        }
        let interaction = match interaction {
            Some(v) => {
                if v.len() != k {
                    return Err(Error::Shape { expected: k, got: v.len() });
                }
                if let Some(bad) = v.iter().find(|v| !v.is_finite()) {
                    return Err(Error::InvalidInput(format!("non-finite interaction index {bad}")));
                }
                v
            }
            None => vec![f64::NAN; k],
        };
        let (direct_norm, direct_range) = min_max(&direct);
        let (interaction_norm, interaction_range) = min_max(&interaction);
        let ranking = rank_by_sum(&direct_norm, &interaction_norm);
        let gap = direct.iter().zip(&interaction).map(|(d, i)| i - d).collect();
        Ok(Self {
            method,
            params,
            direct,
            interaction,
            direct_norm,
            interaction_norm,
            ranking,
            gap,
            direct_range,
            interaction_range,
            mu_star: None,
            direct_clamped: None,
            interaction_clamped: None,
            dropped: 0,
        })
    }

    pub fn from_morris(method: Method, params: Vec<String>, stats: &MorrisStats, dropped: usize) -> Result<Self> {
        let mut report = Self::build(method, params, stats.mu.clone(), stats.sigma.clone())?;
        report.mu_star = Some(stats.mu_star.clone());
        report.dropped = dropped;
        Ok(report)
    }

    pub fn from_sobol(params: Vec<String>, idx: &SobolIndices) -> Result<Self> {
        let mut report = Self::build(Method::Sobol, params, idx.s.clone(), Some(idx.st.clone()))?;
        report.direct_clamped = Some(idx.s_clamped.clone());
        report.interaction_clamped = Some(idx.st_clamped.clone());
        report.dropped = idx.dropped;
        Ok(report)
    }

    /// 1-based rank of each parameter.
    pub fn ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.params.len()];
        for (pos, &i) in self.ranking.iter().enumerate() {
            ranks[i] = pos + 1;
        }
        ranks
    }

    /// Flat CSV: `param,direct,interaction,direct_norm,interaction_norm,rank`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["param", "direct", "interaction", "direct_norm", "interaction_norm", "rank"])?;
        for (i, rank) in self.ranks().into_iter().enumerate() {
            out.write_record([
                self.params[i].clone(),
                fmt_f64(self.direct[i]),
                fmt_f64(self.interaction[i]),
                fmt_f64(self.direct_norm[i]),
                fmt_f64(self.interaction_norm[i]),
                rank.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperspace::{HyperSpace, ParamSpec};
    use crate::sampling::{morris_sample, SamplePlan};
    use proptest::prelude::*;

    fn space(k: usize) -> HyperSpace {
        HyperSpace::new((0..k).map(|i| ParamSpec::continuous(&format!("x{i}"), 0.0, 1.0)).collect()).unwrap()
    }

    fn trajectories(k: usize, r: usize, p: usize, seed: u64) -> (Vec<Trajectory>, f64) {
        match morris_sample(&space(k), r, p, seed).unwrap() {
            SamplePlan::Morris { trajectories, delta, .. } => (trajectories, delta),
            _ => unreachable!(),
        }
    }

    fn outputs(ts: &[Trajectory], f: impl Fn(&[f64]) -> f64) -> Vec<Vec<f64>> {
        ts.iter().map(|t| t.points.iter().map(|p| f(p.coords())).collect()).collect()
    }

    #[test]
    fn linear_model_effects() {
        let (ts, delta) = trajectories(2, 20, 10, 4);
        for t in &ts {
            let y: Vec<f64> = t.points.iter().map(|p| 3.0 * p.coords()[0] + p.coords()[1]).collect();
            let ee = elementary_effects(t, &y, delta).unwrap();
            assert!((ee[0] - 3.0).abs() < 1e-12 && (ee[1] - 1.0).abs() < 1e-12, "{ee:?}");
        }
        let m = EEMatrix::from_trajectories(&ts, &outputs(&ts, |x| 3.0 * x[0] + x[1]), delta).unwrap();
        let stats = morris_mu_sigma(&m).unwrap();
        assert!((stats.mu[0] - 3.0).abs() < 1e-10 && (stats.mu[1] - 1.0).abs() < 1e-10);
        assert!(stats.sigma.unwrap().iter().all(|s| s.abs() < 1e-10));
    }

    #[test]
    fn constant_model_has_zero_effects() {
        let (ts, delta) = trajectories(3, 2, 4, 1);
        let ee = elementary_effects(&ts[0], &[2.0; 4], delta).unwrap();
        assert_eq!(ee, vec![0.0; 3]);
    }

    #[test]
    fn product_model_hand_quotient() {
        // x2 = 1/3 held, x1 stepped 0 -> 2/3 on a p=4 grid
        let t = Trajectory {
            points: vec![
                crate::hyperspace::UnitPoint::new(vec![0.0, 1.0 / 3.0]).unwrap(),
                crate::hyperspace::UnitPoint::new(vec![2.0 / 3.0, 1.0 / 3.0]).unwrap(),
                crate::hyperspace::UnitPoint::new(vec![2.0 / 3.0, 1.0]).unwrap(),
            ],
            moved_dim: vec![0, 1],
            delta_signs: vec![1, 1],
        };
        let y: Vec<f64> = t.points.iter().map(|p| p.coords()[0] * p.coords()[1]).collect();
        let ee = elementary_effects(&t, &y, 2.0 / 3.0).unwrap();
        assert!((ee[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((ee[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn two_point_sigma_and_single_trajectory() {
        let a = 1.7;
        let m = EEMatrix { values: vec![vec![a], vec![-a]], k: 1, dropped: 0 };
        let s = morris_mu_sigma(&m).unwrap();
        assert_eq!(s.mu, vec![0.0]);
        assert!((s.sigma.unwrap()[0] - a * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.mu_star, vec![a]);

        let one = EEMatrix { values: vec![vec![2.0, 3.0]], k: 2, dropped: 0 };
        let s = morris_mu_sigma(&one).unwrap();
        assert_eq!(s.mu, vec![2.0, 3.0]);
        assert!(s.sigma.is_none());
    }

    #[test]
    fn non_finite_trajectories_are_dropped() {
        let (ts, delta) = trajectories(2, 4, 10, 2);
        let mut ys = outputs(&ts, |x| x[0] + x[1]);
        ys[1][0] = f64::NAN;
        let m = EEMatrix::from_trajectories(&ts, &ys, delta).unwrap();
        assert_eq!((m.r(), m.dropped), (3, 1));
        assert!(elementary_effects(&ts[1], &ys[1], delta).is_err());
    }

    #[test]
    fn constant_model_is_degenerate() {
        let err = sobol_indices(&[1.0; 8], &[1.0; 8], &[vec![1.0; 8]], SobolEstimator::Saltelli).unwrap_err();
        assert!(matches!(err, Error::DegenerateModel { .. }));
    }

    #[test]
    fn sobol_drops_paired_rows() {
        let ya = vec![1.0, 2.0, f64::NAN, 4.0, 0.5];
        let yb = vec![2.0, 1.0, 3.0, 0.0, 1.0];
        let yc = vec![vec![1.5, 2.5, 3.5, 3.0, 0.1]];
        let idx = sobol_indices(&ya, &yb, &yc, SobolEstimator::Saltelli).unwrap();
        assert_eq!(idx.dropped, 1);
    }

    #[test]
    fn report_examples() {
        let r = SensitivityReport::build(Method::Morris, vec!["a".into(), "b".into()], vec![3.0, 1.0], Some(vec![0.0, 0.0])).unwrap();
        assert_eq!(r.direct_norm, vec![1.0, 0.0]);
        assert_eq!(r.interaction_norm, vec![0.0, 0.0]);
        assert_eq!(r.ranking, vec![0, 1]);

        let r = SensitivityReport::build(Method::Sobol, vec!["a".into()], vec![0.4], Some(vec![0.6])).unwrap();
        assert_eq!(r.direct_norm, vec![0.0]);

        let r = SensitivityReport::build(Method::Sobol, vec!["a".into(), "b".into()], vec![0.2, 0.8], Some(vec![0.8, 0.2])).unwrap();
        assert_eq!(r.ranking, vec![0, 1]);
        assert_eq!(r.ranks(), vec![1, 2]);
    }

    #[test]
    fn report_without_sigma() {
        let r = SensitivityReport::build(Method::Morris, vec!["a".into(), "b".into()], vec![1.0, 2.0], None).unwrap();
        assert!(r.interaction.iter().all(|v| v.is_nan()));
        assert_eq!(r.ranking, vec![1, 0]);
        assert!(r.to_csv_string().unwrap().contains("NaN"));
    }

    proptest! {
        #[test]
        fn affine_models_give_exact_coefficients(coef in proptest::collection::vec(-5.0f64..5.0, 1..6), c0 in -3.0f64..3.0, seed in any::<u64>(), pi in 0usize..3) {
            let p = [2, 4, 10][pi];
            let (ts, delta) = trajectories(coef.len(), 5, p, seed);
            let f = |x: &[f64]| c0 + coef.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            let m = EEMatrix::from_trajectories(&ts, &outputs(&ts, f), delta).unwrap();
            for row in &m.values {
                for (e, c) in row.iter().zip(&coef) {
                    prop_assert!((e - c).abs() < 1e-9);
                }
            }
            let s = morris_mu_sigma(&m).unwrap();
            prop_assert!(s.sigma.unwrap().iter().all(|v| v.abs() < 1e-9));
        }

        #[test]
        fn separable_models_have_zero_sigma_when_grid_has_two_levels(seed in any::<u64>()) {
            // With p = 2 every step of dimension i goes between levels 0 and 1, so a
            // separable model yields identical effects across trajectories.
            let (ts, delta) = trajectories(3, 8, 2, seed);
            let f = |x: &[f64]| x[0].powi(3) + (2.0 * x[1]).sin() + x[2].exp();
            let m = EEMatrix::from_trajectories(&ts, &outputs(&ts, f), delta).unwrap();
            prop_assert!(morris_mu_sigma(&m).unwrap().sigma.unwrap().iter().all(|v| v.abs() < 1e-12));
        }

        #[test]
        fn ranking_is_affine_invariant(
            d in proptest::collection::vec(-10.0f64..10.0, 2..8),
            scale in 0.01f64..100.0,
            shift in -50.0f64..50.0,
        ) {
            let k = d.len();
            let inter: Vec<f64> = d.iter().map(|v| (v * 1.7).sin() + 1.0).collect();
            let names: Vec<String> = (0..k).map(|i| format!("p{i}")).collect();
            let base = SensitivityReport::build(Method::Morris, names.clone(), d.clone(), Some(inter.clone())).unwrap();
            let t = |v: &Vec<f64>| v.iter().map(|x| scale * x + shift).collect::<Vec<_>>();
            let moved = SensitivityReport::build(Method::Morris, names, t(&d), Some(t(&inter))).unwrap();
            prop_assert_eq!(base.ranking, moved.ranking);
        }

        #[test]
        fn norms_in_unit_interval(d in proptest::collection::vec(-10.0f64..10.0, 1..8)) {
            let (n, _) = min_max(&d);
            prop_assert!(n.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}

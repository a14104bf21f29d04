//! Experiment orchestration: config, deterministic parallel execution of the
//! (sample, problem, run) grid, the on-disk store and report emission.
//!
//! Store layout:
//!
//! | file | columns |
//! |---|---|
//! | `manifest.json` | resolved config, sample plan, seeds, constants |
//! | `samples.csv` | `sample_id`, unit coordinates `u_<param>`, decoded `<param>` |
//! | `evals.csv` | `sample_id,problem,run,seed,evals_used,failed,<metric>...` |
//! | `records.csv` | `sample_id,problem,metric,mean,runs,failures,run_values` |
//! | `y.csv` | `sample_id,<metric>...` aggregated model outputs |
//! | `indices_<method>_<metric>.csv` | `param,direct,interaction,direct_norm,interaction_norm,rank` |
//! | `indices_by_problem_<method>_<metric>.csv` | `problem,param,direct,interaction,direct_norm,interaction_norm,rank` |
//! | `ranking.csv` | `report,position,param,score` |
//! | `bins_<param>_<metric>.csv` | `param,metric,bins,sigma,bin,lower,upper,count,mean,smoothed,interpolated` |
//! | `ttests.csv` | `metric,a,b,t,p,df,infinite` |
//! | `clusters.csv` | `metric,item,cluster,pc1,pc2,k,degenerate,silhouette_curve` |

mod algorithm;
mod config;
mod report;
mod store;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use algorithm::{Algorithm, CellOutcome};
pub use config::{Aggregation, ExperimentConfig, HyperspaceSpec, Resolved, ENV_OUTPUT_DIR, ENV_PARALLELISM};
pub use report::{aggregate, analyze_plan, bin_scores, borda, gaussian_filter1d, normalize_minmax, normalize_rank, BinnedCurve};
pub use store::{CellKey, EvalRow, EvalStore};

use crate::analysis::{kmeans_silhouette, pairwise_ttest, EffectKind, EffectSample};
use crate::error::{Error, Result};
use crate::hyperspace::{ConcreteConfig, HyperSpace, ParamSpec};
use crate::indices::{SensitivityReport, SobolEstimator};
use crate::metrics::{Metric, ReferenceData};
use crate::problems::Problem;
use crate::sampling::{morris_lhs_sample, morris_sample, sobol_sample, Method, PlanSizes, SampleManifest, SamplePlan};
use crate::seed::{derive, hash_str};
use crate::util::fmt_f64;

const MANIFEST: &str = "manifest.json";
const EVALS: &str = "evals.csv";

/// Everything needed to reproduce and re-analyze a store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub version: String,
    pub algorithm: Algorithm,
    pub method: Method,
    pub space: Vec<ParamSpec>,
    pub problems: Vec<String>,
    pub runs: usize,
    pub budget: usize,
    pub metrics: Vec<Metric>,
    pub seed: u64,
    pub aggregation: Aggregation,
    pub sobol_estimator: SobolEstimator,
    pub bins: usize,
    pub smoothing_sigma: f64,
    pub total_cells: usize,
    /// Seed recipe and analysis choices, recorded verbatim.
    pub decisions: Vec<String>,
    pub constants: BTreeMap<String, f64>,
    pub samples: SampleManifest,
}

impl Manifest {
    fn build(res: &Resolved) -> Result<Self> {
        let cfg = &res.config;
        let plan = match cfg.method {
            Method::Morris => morris_sample(&res.space, cfg.r.unwrap_or(0), cfg.levels(), cfg.seed)?,
            Method::MorrisLhs => morris_lhs_sample(&res.space, cfg.r.unwrap_or(0), cfg.levels(), cfg.seed)?,
            Method::Sobol => sobol_sample(&res.space, cfg.n.unwrap_or(0), cfg.seed, cfg.quasi_random)?,
        };
        let sizes = match cfg.method {
            Method::Sobol => PlanSizes { r: None, p: None, n: cfg.n },
            _ => PlanSizes { r: cfg.r, p: Some(cfg.levels()), n: None },
        };
        let samples = SampleManifest {
            method: cfg.method,
            seed: cfg.seed,
            k: res.space.k(),
            sizes,
            total_points: plan.len(),
            lhs_snapped: cfg.method == Method::MorrisLhs,
            quasi_random: cfg.quasi_random,
            plan,
        };
        let decisions = vec![
            "cell seed = derive(master seed, [sample_id, fnv1a(problem id), run])".into(),
            "failed runs score NaN; a cell mean averages the finite runs".into(),
            format!("cross-problem aggregation: {:?}, problems in id order", cfg.aggregation).to_lowercase(),
            "a sample with any non-finite problem score is dropped by the index estimators".into(),
            "multi-objective metrics use the non-dominated union of all generations".into(),
        ];
        let constants = BTreeMap::from([
            ("front_samples".to_string(), crate::metrics::FRONT_SAMPLES as f64),
            ("pbi_theta".to_string(), crate::moo::PBI_THETA),
            ("hv_reference_nadir_factor".to_string(), 1.1),
        ]);
        Ok(Self {
            format: 1,
            version: env!("CARGO_PKG_VERSION").to_string(),
            algorithm: cfg.algorithm,
            method: cfg.method,
            space: res.space.params().to_vec(),
            problems: res.problems.clone(),
            runs: cfg.runs,
            budget: cfg.budget,
            metrics: res.metrics.clone(),
            seed: cfg.seed,
            aggregation: cfg.aggregation,
            sobol_estimator: cfg.sobol_estimator,
            bins: res.bins,
            smoothing_sigma: res.sigma,
            total_cells: samples.total_points * res.problems.len() * cfg.runs,
            decisions,
            constants,
            samples,
        })
    }

    pub fn plan(&self) -> &SamplePlan {
        &self.samples.plan
    }

    pub fn space(&self) -> Result<HyperSpace> {
        HyperSpace::new(self.space.clone())
    }

    pub fn cell_seed(&self, sample_id: usize, problem: &str, run: usize) -> u64 {
        derive(self.seed, &[sample_id as u64, hash_str(problem), run as u64])
    }

    fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Execution knobs that do not affect results.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Stop after this many newly executed cells (simulates an interruption).
    pub cell_limit: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub dir: PathBuf,
    pub complete: bool,
    pub total_cells: usize,
    /// Cells found in the store when the run started.
    pub resumed: usize,
    pub executed: usize,
    pub failed_runs: usize,
    pub analysis: Option<Analysis>,
}

/// Reports derived from a complete store.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub reports: Vec<(Metric, SensitivityReport)>,
    pub per_problem: Vec<(Metric, Vec<(String, SensitivityReport)>)>,
    pub consolidated: Option<(Vec<usize>, Vec<f64>)>,
    /// Non-fatal issues, e.g. a degenerate model for one metric.
    pub warnings: Vec<String>,
}

/// Runs (or resumes) the experiment described by `cfg` and writes every report.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome> {
    let res = cfg.resolve()?;
    let manifest = Manifest::build(&res)?;
    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir)?;
    let manifest_path = dir.join(MANIFEST);
    let text = manifest.to_json()?;
    if manifest_path.exists() {
        let old = std::fs::read_to_string(&manifest_path)?;
        if old != text {
            return Err(Error::CorruptStore(format!(
                "{} belongs to a different experiment; refusing to resume",
                manifest_path.display()
            )));
        }
    } else {
        std::fs::write(&manifest_path, &text)?;
    }

    let space = manifest.space()?;
    let configs: Vec<ConcreteConfig> = manifest.plan().points().iter().map(|u| space.decode(u)).collect::<Result<_>>()?;
    write_samples(&dir, &space, &manifest)?;

    let evals_path = dir.join(EVALS);
    let mut store = EvalStore::open(&evals_path, &manifest.metrics)?;
    check_rows(&store, &manifest)?;
    let resumed = store.rows.len();

    let mut pending: Vec<CellKey> = Vec::new();
    for s in 0..configs.len() {
        for p in &manifest.problems {
            for r in 0..manifest.runs {
                let key = (s, p.clone(), r);
                if !store.rows.contains_key(&key) {
                    pending.push(key);
                }
            }
        }
    }
    let limit = opts.cell_limit.unwrap_or(usize::MAX);
    let truncated = pending.len() > limit;
    pending.truncate(limit);

    let problems: HashMap<String, Problem> =
        manifest.problems.iter().map(|id| Problem::by_id(id).map(|p| (id.clone(), p))).collect::<Result<_>>()?;
    let references: HashMap<String, ReferenceData> = if manifest.algorithm.is_multi_objective() {
        problems.iter().map(|(id, p)| ReferenceData::for_problem(p).map(|r| (id.clone(), r))).collect::<Result<_>>()?
    } else {
        HashMap::new()
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let batch = (pool.current_num_threads() * 4).max(16);
    for chunk in pending.chunks(batch) {
        let rows: Vec<EvalRow> = pool.install(|| {
            chunk
                .par_iter()
                .map(|(s, p, r)| {
                    let seed = manifest.cell_seed(*s, p, *r);
                    let out = manifest.algorithm.run(
                        &configs[*s],
                        &problems[p],
                        references.get(p),
                        &manifest.metrics,
                        manifest.budget,
                        seed,
                    );
                    EvalRow {
                        sample_id: *s,
                        problem: p.clone(),
                        run: *r,
                        seed,
                        evals_used: out.evals_used,
                        failed: out.failed,
                        values: out.values,
                    }
                })
                .collect()
        });
        store.append(rows)?;
    }

    let failed_runs = store.rows.values().filter(|r| r.failed).count();
    let mut outcome = Outcome {
        dir: dir.clone(),
        complete: !truncated,
        total_cells: manifest.total_cells,
        resumed,
        executed: pending.len(),
        failed_runs,
        analysis: None,
    };
    if truncated {
        return Ok(outcome);
    }
    store.canonicalize(&evals_path, &manifest.metrics)?;
    drop(store);
    let loaded = Store::open(&dir)?;
    outcome.analysis = Some(loaded.write_all_reports()?);
    Ok(outcome)
}

fn check_rows(store: &EvalStore, m: &Manifest) -> Result<()> {
    let n = m.plan().len();
    for (s, p, r) in store.rows.keys() {
        if *s >= n || *r >= m.runs || m.problems.binary_search(p).is_err() {
            return Err(Error::CorruptStore(format!("cell ({s}, {p}, {r}) is outside the experiment grid")));
        }
    }
    Ok(())
}

fn write_samples(dir: &Path, space: &HyperSpace, m: &Manifest) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let names = space.names();
    let mut head = vec!["sample_id".to_string()];
    head.extend(names.iter().map(|n| format!("u_{n}")));
    head.extend(names.iter().cloned());
    w.write_record(&head)?;
    for (i, u) in m.plan().points().iter().enumerate() {
        let c = space.decode(u)?;
        let mut rec = vec![i.to_string()];
        rec.extend(u.coords().iter().map(|&v| fmt_f64(v)));
        rec.extend(c.values.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    write_csv(dir.join("samples.csv"), w)
}

fn write_csv(path: PathBuf, w: csv::Writer<Vec<u8>>) -> Result<()> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    std::fs::write(path, bytes)?;
    Ok(())
}

/// A store opened for analysis.
#[derive(Debug)]
pub struct Store {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub rows: BTreeMap<CellKey, EvalRow>,
}

impl Store {
    pub fn open(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join(MANIFEST))
            .map_err(|e| Error::CorruptStore(format!("{}: {e}", dir.join(MANIFEST).display())))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| Error::CorruptStore(format!("manifest: {e}")))?;
        let store = EvalStore::open(&dir.join(EVALS), &manifest.metrics)?;
        check_rows(&store, &manifest)?;
        Ok(Self { dir: dir.to_path_buf(), manifest, rows: store.rows })
    }

    pub fn is_complete(&self) -> bool {
        self.rows.len() == self.manifest.total_cells
    }

    fn require_complete(&self) -> Result<()> {
        if !self.is_complete() {
            return Err(Error::InvalidInput(format!(
                "store has {} of {} cells; resume the run first",
                self.rows.len(),
                self.manifest.total_cells
            )));
        }
        Ok(())
    }

    fn metric_index(&self, metric: Metric) -> Result<usize> {
        self.manifest
            .metrics
            .iter()
            .position(|&m| m == metric)
            .ok_or_else(|| Error::InvalidInput(format!("metric `{metric}` is not in this store")))
    }

    /// Run-means per problem (id order) and sample: `NaN` when every run failed.
    pub fn cell_means(&self, metric: Metric) -> Result<BTreeMap<String, Vec<f64>>> {
        let mi = self.metric_index(metric)?;
        let n = self.manifest.plan().len();
        let mut sums: BTreeMap<String, Vec<(f64, usize)>> =
            self.manifest.problems.iter().map(|p| (p.clone(), vec![(0.0, 0); n])).collect();
        for row in self.rows.values() {
            let v = row.values[mi];
            if v.is_finite() {
                let slot = &mut sums.get_mut(&row.problem).expect("checked problem")[row.sample_id];
                slot.0 += v;
                slot.1 += 1;
            }
        }
        Ok(sums
            .into_iter()
            .map(|(p, v)| (p, v.into_iter().map(|(s, c)| if c > 0 { s / c as f64 } else { f64::NAN }).collect()))
            .collect())
    }

    /// Aggregated model output per sample.
    pub fn outputs(&self, metric: Metric) -> Result<Vec<f64>> {
        Ok(aggregate(&self.cell_means(metric)?, self.manifest.aggregation))
    }

    fn params(&self) -> Vec<String> {
        self.manifest.space.iter().map(|p| p.name.clone()).collect()
    }

    pub fn report(&self, metric: Metric) -> Result<SensitivityReport> {
        self.require_complete()?;
        let y = self.outputs(metric)?;
        analyze_plan(self.manifest.plan(), self.params(), &y, self.manifest.sobol_estimator).map_err(|e| match e {
            Error::DegenerateModel { .. } => Error::DegenerateModel { metric: metric.to_string(), problem: "all".into() },
            other => other,
        })
    }

    /// One report per problem; problems whose model is degenerate are skipped.
    pub fn per_problem_reports(&self, metric: Metric) -> Result<(Vec<(String, SensitivityReport)>, Vec<String>)> {
        self.require_complete()?;
        let mut out = Vec::new();
        let mut warnings = Vec::new();
        for (p, v) in self.cell_means(metric)? {
            let y = normalize_minmax(&v);
            match analyze_plan(self.manifest.plan(), self.params(), &y, self.manifest.sobol_estimator) {
                Ok(r) => out.push((p, r)),
                Err(e) => warnings.push(format!("{metric} on {p}: {e}")),
            }
        }
        Ok((out, warnings))
    }

    pub fn bins(&self, param: &str, metric: Metric, bins: Option<usize>, sigma: Option<f64>) -> Result<BinnedCurve> {
        self.require_complete()?;
        let space = self.manifest.space()?;
        let i = space.index_of(param).ok_or_else(|| Error::InvalidInput(format!("unknown parameter `{param}`")))?;
        let spec = &space.params()[i];
        let xs: Vec<f64> = self
            .manifest
            .plan()
            .points()
            .iter()
            .map(|u| spec.decode(u.coords()[i]).as_f64())
            .collect();
        let y = self.outputs(metric)?;
        bin_scores(
            param,
            metric,
            &xs,
            &y,
            spec.value_range(),
            bins.unwrap_or(self.manifest.bins),
            sigma.unwrap_or(self.manifest.smoothing_sigma),
        )
    }

    fn index_name(&self, prefix: &str, metric: Metric) -> PathBuf {
        self.dir.join(format!("{prefix}_{}_{}.csv", self.manifest.method.as_str(), metric.as_str()))
    }

    /// Writes every report file and returns what was computed.
    pub fn write_all_reports(&self) -> Result<Analysis> {
        self.require_complete()?;
        let mut analysis = Analysis { reports: Vec::new(), per_problem: Vec::new(), consolidated: None, warnings: Vec::new() };
        self.write_records()?;
        self.write_outputs()?;
        for &metric in &self.manifest.metrics {
            match self.report(metric) {
                Ok(r) => {
                    std::fs::write(self.index_name("indices", metric), r.to_csv_string()?)?;
                    std::fs::write(
                        self.index_name("indices", metric).with_extension("json"),
                        serde_json::to_string_pretty(&r)? + "\n",
                    )?;
                    analysis.reports.push((metric, r));
                }
                Err(e) => analysis.warnings.push(e.to_string()),
            }
            let (per, warnings) = self.per_problem_reports(metric)?;
            analysis.warnings.extend(warnings);
            self.write_per_problem(metric, &per)?;
            analysis.per_problem.push((metric, per));
            for name in self.params() {
                match self.bins(&name, metric, None, None) {
                    Ok(curve) => std::fs::write(self.dir.join(bins_file(&name, metric)), curve.to_csv_string()?)?,
                    Err(e) => analysis.warnings.push(format!("bins for {name}/{metric}: {e}")),
                }
            }
        }
        analysis.consolidated = self.write_ranking(&analysis.reports)?;
        let (ttests, clusters) = self.stats(&analysis.per_problem, &mut analysis.warnings)?;
        write_csv(self.dir.join("ttests.csv"), ttests)?;
        write_csv(self.dir.join("clusters.csv"), clusters)?;
        Ok(analysis)
    }

    fn write_records(&self) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["sample_id", "problem", "metric", "mean", "runs", "failures", "run_values"])?;
        let runs = self.manifest.runs;
        let keys: Vec<&CellKey> = self.rows.keys().collect();
        for group in keys.chunks(runs) {
            let rows: Vec<&EvalRow> = group.iter().map(|k| &self.rows[*k]).collect();
            for (mi, metric) in self.manifest.metrics.iter().enumerate() {
                let vals: Vec<f64> = rows.iter().map(|r| r.values[mi]).collect();
                let finite: Vec<f64> = vals.iter().copied().filter(|v| v.is_finite()).collect();
                let mean = if finite.is_empty() { f64::NAN } else { crate::util::mean(&finite) };
                w.write_record([
                    rows[0].sample_id.to_string(),
                    rows[0].problem.clone(),
                    metric.as_str().to_string(),
                    fmt_f64(mean),
                    runs.to_string(),
                    rows.iter().filter(|r| r.failed).count().to_string(),
                    vals.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(";"),
                ])?;
            }
        }
        write_csv(self.dir.join("records.csv"), w)
    }

    fn write_outputs(&self) -> Result<()> {
        let ys: Vec<Vec<f64>> = self.manifest.metrics.iter().map(|&m| self.outputs(m)).collect::<Result<_>>()?;
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut head = vec!["sample_id".to_string()];
        head.extend(self.manifest.metrics.iter().map(|m| m.as_str().to_string()));
        w.write_record(&head)?;
        for s in 0..self.manifest.plan().len() {
            let mut rec = vec![s.to_string()];
            rec.extend(ys.iter().map(|y| fmt_f64(y[s])));
            w.write_record(&rec)?;
        }
        write_csv(self.dir.join("y.csv"), w)
    }

    fn write_per_problem(&self, metric: Metric, per: &[(String, SensitivityReport)]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["problem", "param", "direct", "interaction", "direct_norm", "interaction_norm", "rank"])?;
        for (p, r) in per {
            for (i, rank) in r.ranks().into_iter().enumerate() {
                w.write_record([
                    p.clone(),
                    r.params[i].clone(),
                    fmt_f64(r.direct[i]),
                    fmt_f64(r.interaction[i]),
                    fmt_f64(r.direct_norm[i]),
                    fmt_f64(r.interaction_norm[i]),
                    rank.to_string(),
                ])?;
            }
        }
        write_csv(self.index_name("indices_by_problem", metric), w)
    }

    fn write_ranking(&self, reports: &[(Metric, SensitivityReport)]) -> Result<Option<(Vec<usize>, Vec<f64>)>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["report", "position", "param", "score"])?;
        for (metric, r) in reports {
            let name = format!("{}_{}", self.manifest.method.as_str(), metric.as_str());
            for (pos, &i) in r.ranking.iter().enumerate() {
                let score = r.direct_norm[i] + r.interaction_norm[i];
                w.write_record([name.clone(), (pos + 1).to_string(), r.params[i].clone(), fmt_f64(score)])?;
            }
        }
        let consolidated = if reports.is_empty() {
            None
        } else {
            let refs: Vec<&SensitivityReport> = reports.iter().map(|(_, r)| r).collect();
            let (order, points) = borda(&refs)?;
            for (pos, &i) in order.iter().enumerate() {
                w.write_record(["consolidated".to_string(), (pos + 1).to_string(), refs[0].params[i].clone(), fmt_f64(points[i])])?;
            }
            Some((order, points))
        };
        write_csv(self.dir.join("ranking.csv"), w)?;
        Ok(consolidated)
    }

    /// t-test matrix and clustering over per-problem normalized indices.
    #[allow(clippy::type_complexity)]
    fn stats(
        &self,
        per_problem: &[(Metric, Vec<(String, SensitivityReport)>)],
        warnings: &mut Vec<String>,
    ) -> Result<(csv::Writer<Vec<u8>>, csv::Writer<Vec<u8>>)> {
        let mut tt = csv::Writer::from_writer(Vec::new());
        tt.write_record(["metric", "a", "b", "t", "p", "df", "infinite"])?;
        let mut cl = csv::Writer::from_writer(Vec::new());
        cl.write_record(["metric", "item", "cluster", "pc1", "pc2", "k", "degenerate", "silhouette_curve"])?;
        let params = self.params();
        for (metric, per) in per_problem {
            let samples = effect_samples(&params, per);
            for i in 0..samples.len() {
                for j in 0..i {
                    match pairwise_ttest(&samples[i].values, &samples[j].values) {
                        Ok(t) => tt.write_record([
                            metric.as_str().to_string(),
                            samples[i].label(),
                            samples[j].label(),
                            fmt_f64(t.t),
                            fmt_f64(t.p),
                            fmt_f64(t.df),
                            u8::from(t.infinite).to_string(),
                        ])?,
                        Err(e) => warnings.push(format!("t-test {}/{}: {e}", samples[i].label(), samples[j].label())),
                    }
                }
            }
            if per.len() < 3 {
                warnings.push(format!("clustering for {metric} needs >= 3 problems, have {}", per.len()));
                continue;
            }
            let items: Vec<Vec<f64>> = per
                .iter()
                .map(|(_, r)| {
                    let inter = r.interaction_norm.iter().map(|v| if v.is_finite() { *v } else { 0.0 });
                    r.direct_norm.iter().copied().chain(inter).collect()
                })
                .collect();
            let candidates: Vec<usize> = (2..=10).collect();
            let c = kmeans_silhouette(&items, &candidates, derive(self.manifest.seed, &[hash_str("clusters"), hash_str(metric.as_str())]))?;
            let curve = c.silhouette_curve.iter().map(|(k, s)| format!("{k}:{}", fmt_f64(*s))).collect::<Vec<_>>().join(";");
            for (idx, (p, _)) in per.iter().enumerate() {
                cl.write_record([
                    metric.as_str().to_string(),
                    p.clone(),
                    c.assignments[idx].to_string(),
                    fmt_f64(c.projection[idx][0]),
                    fmt_f64(c.projection[idx][1]),
                    c.k.to_string(),
                    u8::from(c.degenerate).to_string(),
                    curve.clone(),
                ])?;
            }
        }
        Ok((tt, cl))
    }
}

pub fn bins_file(param: &str, metric: Metric) -> String {
    format!("bins_{param}_{}.csv", metric.as_str())
}

/// Direct then interaction samples per parameter; interaction samples with
/// undefined values (single trajectory) are left out.
pub fn effect_samples(params: &[String], per: &[(String, SensitivityReport)]) -> Vec<EffectSample> {
    let mut out = Vec::new();
    for (i, name) in params.iter().enumerate() {
        out.push(EffectSample {
            param: name.clone(),
            kind: EffectKind::Direct,
            values: per.iter().map(|(_, r)| r.direct_norm[i]).collect(),
        });
        if per.iter().all(|(_, r)| r.interaction[i].is_finite()) {
            out.push(EffectSample {
                param: name.clone(),
                kind: EffectKind::Interaction,
                values: per.iter().map(|(_, r)| r.interaction_norm[i]).collect(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smoke(dir: &Path) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::from_toml(
            r#"
algorithm = "de"
method = "morris"
r = 1
problems = ["sphere_n5"]
runs = 1
budget = 1500
seed = 11
"#,
        )
        .unwrap();
        cfg.output_dir = dir.to_path_buf();
        cfg
    }

    #[test]
    fn minimal_grid_is_k_plus_one_cells() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&smoke(dir.path()), &RunOptions::default()).unwrap();
        assert!(out.complete);
        assert_eq!(out.total_cells, 8);
        assert_eq!(out.executed, 8);
        let evals = std::fs::read_to_string(dir.path().join("evals.csv")).unwrap();
        assert_eq!(evals.lines().count(), 9);
        assert!(dir.path().join("indices_morris_best.csv").exists());
        assert!(dir.path().join("bins_lambda_best.csv").exists());
        let again = run_experiment(&smoke(dir.path()), &RunOptions::default()).unwrap();
        assert_eq!((again.resumed, again.executed), (8, 0));
    }

    #[test]
    fn changed_config_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        run_experiment(&smoke(dir.path()), &RunOptions { cell_limit: Some(2) }).unwrap();
        let mut other = smoke(dir.path());
        other.seed = 12;
        assert!(matches!(run_experiment(&other, &RunOptions::default()), Err(Error::CorruptStore(_))));
    }

    #[test]
    fn interrupted_run_resumes_to_same_bytes() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_experiment(&smoke(a.path()), &RunOptions::default()).unwrap();
        let part = run_experiment(&smoke(b.path()), &RunOptions { cell_limit: Some(3) }).unwrap();
        assert!(!part.complete && part.analysis.is_none());
        assert!(Store::open(b.path()).unwrap().report(Metric::Best).is_err());
        let mut cfg = smoke(b.path());
        cfg.parallelism = 1;
        let done = run_experiment(&cfg, &RunOptions::default()).unwrap();
        assert_eq!((done.resumed, done.executed), (3, 5));
        for f in ["evals.csv", "indices_morris_best.csv", "ranking.csv", "y.csv"] {
            assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
        }
    }
}

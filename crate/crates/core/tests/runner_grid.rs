use std::path::Path;

use easense::runner::{run_experiment, ExperimentConfig, RunOptions, Store};

fn config(dir: &Path, problems: &str, parallelism: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_toml(&format!(
        "algorithm = \"moead\"\nmethod = \"morris_lhs\"\nr = 2\nproblems = {problems}\nruns = 2\nbudget = 1200\nmetrics = [\"igd\", \"hv\"]\nseed = 21\n"
    ))
    .unwrap();
    cfg.output_dir = dir.to_path_buf();
    cfg.parallelism = parallelism;
    cfg
}

#[test]
fn grid_is_independent_of_threads_and_problem_order() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let out = run_experiment(&config(a.path(), r#"["dtlz1_m3_n10", "wfg6_m3_n10"]"#, 1), &RunOptions::default());
    // zdt1 is bi-objective; mixing objective counts is fine for multi-objective algorithms
    let out = out.unwrap();
    run_experiment(&config(b.path(), r#"["wfg6_m3_n10", "dtlz1_m3_n10"]"#, 4), &RunOptions::default()).unwrap();

    // samples x problems x runs
    let samples = 2 * (7 + 1);
    assert_eq!(out.total_cells, samples * 2 * 2);
    let evals = std::fs::read_to_string(a.path().join("evals.csv")).unwrap();
    assert_eq!(evals.lines().count() - 1, out.total_cells);

    for f in ["evals.csv", "y.csv", "records.csv", "indices_morris_lhs_igd.csv", "indices_morris_lhs_hv.csv", "ranking.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }

    let store = Store::open(a.path()).unwrap();
    assert!(store.is_complete());
    for y in store.outputs(easense::metrics::Metric::Hv).unwrap() {
        assert!(y.is_nan() || (0.0..=1.0).contains(&y));
    }
    let ranking = std::fs::read_to_string(a.path().join("ranking.csv")).unwrap();
    assert_eq!(ranking.lines().filter(|l| l.starts_with("consolidated")).count(), 7);
}

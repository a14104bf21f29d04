use std::process::Command;

fn easense(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_easense"))
        .args(args)
        .env_remove("EASENSE_OUTPUT_DIR")
        .env_remove("EASENSE_PARALLELISM")
        .output()
        .unwrap();
    (out.status.success(), String::from_utf8_lossy(&out.stdout).into_owned(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn presets_lists_all_spaces() {
    let (ok, out, _) = easense(&["presets"]);
    assert!(ok);
    for name in ["cmaes (k = 5)", "de (k = 7)", "nsga3 (k = 6)", "moead (k = 7)", "b_type"] {
        assert!(out.contains(name), "{name} missing from\n{out}");
    }
}

#[test]
fn run_report_bins_stats() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    let cfg = dir.path().join("exp.json");
    std::fs::write(
        &cfg,
        serde_json::json!({
            "algorithm": "cmaes",
            "method": "sobol",
            "n": 4,
            "problems": ["sphere_n4", "ackley_n4", "rastrigin_n4"],
            "budget": 1000,
            "seed": 3,
            "output_dir": store,
        })
        .to_string(),
    )
    .unwrap();
    let store_s = store.to_str().unwrap();

    let (ok, out, err) = easense(&["run", cfg.to_str().unwrap(), "--cell-limit", "5"]);
    assert!(ok, "{err}");
    assert!(out.contains("incomplete"));
    let (ok, _, err) = easense(&["report", store_s]);
    assert!(!ok && err.contains("resume"));

    let (ok, out, err) = easense(&["run", cfg.to_str().unwrap()]);
    assert!(ok, "{err}");
    assert!(out.contains("84 cells, 5 resumed, 79 executed"), "{out}");

    let (ok, out, _) = easense(&["report", store_s, "--metric", "best", "--method", "sobol"]);
    assert!(ok && out.contains("# sobol / best") && out.contains("mu_lambda_ratio"));
    let (ok, _, _) = easense(&["report", store_s, "--method", "morris"]);
    assert!(!ok);

    let (ok, out, _) = easense(&["bins", store_s, "--param", "sigma0", "--bins", "4", "--sigma", "0"]);
    assert!(ok);
    assert_eq!(out.lines().count(), 5);
    assert!(store.join("bins_sigma0_best.csv").exists());

    let (ok, _, err) = easense(&["stats", store_s]);
    assert!(ok, "{err}");
    for f in ["manifest.json", "samples.csv", "evals.csv", "indices_sobol_best.csv", "ranking.csv", "ttests.csv", "clusters.csv"] {
        assert!(store.join(f).exists(), "{f}");
    }
    let ttests = std::fs::read_to_string(store.join("ttests.csv")).unwrap();
    // 5 params x 2 kinds -> 45 lower-triangular pairs
    assert_eq!(ttests.lines().count(), 46);
}

#[test]
fn env_overrides_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, "algorithm = \"de\"\nmethod = \"morris\"\nr = 1\nproblems = [\"sphere_n3\"]\nbudget = 1200\n").unwrap();
    let target = dir.path().join("from_env");
    let out = Command::new(env!("CARGO_BIN_EXE_easense"))
        .args(["run", cfg.to_str().unwrap()])
        .env("EASENSE_OUTPUT_DIR", &target)
        .env("EASENSE_PARALLELISM", "1")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(target.join("evals.csv").exists());
}

#[test]
fn bad_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "algorithm = \"de\"\nmethod = \"morris\"\nproblems = [\"sphere\"]\n").unwrap();
    let (ok, _, err) = easense(&["run", cfg.to_str().unwrap()]);
    assert!(!ok && err.starts_with("error:"));
}

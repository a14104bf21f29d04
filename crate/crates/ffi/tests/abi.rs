use std::ffi::{CStr, CString};
use std::ptr;

use easense_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(easense_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn problem_round_trip() {
    let id = CString::new("dtlz2_m3_n10").unwrap();
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(easense_problem_new(id.as_ptr(), &mut p), EasenseStatus::Ok);
        let (mut dim, mut m) = (0, 0);
        assert_eq!(easense_problem_shape(p, &mut dim, &mut m), EasenseStatus::Ok);
        assert_eq!((dim, m), (10, 3));
        let x = vec![0.5; dim];
        let mut f = [0.0; 3];
        assert_eq!(easense_problem_evaluate(p, x.as_ptr(), x.len(), f.as_mut_ptr(), 3), EasenseStatus::Ok);
        let norm: f64 = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert_eq!(easense_problem_evaluate(p, x.as_ptr(), x.len(), f.as_mut_ptr(), 2), EasenseStatus::BufferTooSmall);
        easense_problem_free(p);
    }
}

#[test]
fn errors_are_reported() {
    let bad = CString::new("no_such_problem").unwrap();
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(easense_problem_new(bad.as_ptr(), &mut p), EasenseStatus::UnknownProblem);
        assert!(p.is_null());
        assert!(last_error().contains("no_such_problem"));
        assert_eq!(easense_problem_new(ptr::null(), &mut p), EasenseStatus::NullPointer);
        let mut dim = 0;
        assert_eq!(easense_problem_shape(ptr::null(), &mut dim, &mut dim), EasenseStatus::NullPointer);
        easense_problem_free(ptr::null_mut());
    }
    assert!(!unsafe { CStr::from_ptr(easense_version()) }.to_bytes().is_empty());
}

#[test]
fn hypervolume_hand_instance() {
    let pts = [0.5, 0.5, 0.25, 0.75];
    let r = [1.0, 1.0];
    let mut hv = 0.0;
    unsafe {
        assert_eq!(easense_hypervolume(pts.as_ptr(), 2, 2, r.as_ptr(), &mut hv), EasenseStatus::Ok);
    }
    assert!((hv - 0.3125).abs() < 1e-12);
}

#[test]
fn experiment_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("store");
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        format!(
            "algorithm = \"de\"\nmethod = \"morris\"\nr = 2\nproblems = [\"sphere_n5\"]\nbudget = 1500\nseed = 4\noutput_dir = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let cfg = CString::new(cfg.to_str().unwrap()).unwrap();
    let dir_c = CString::new(out.to_str().unwrap()).unwrap();
    let metric = CString::new("best").unwrap();
    unsafe {
        let mut complete = 0;
        assert_eq!(easense_run_experiment(cfg.as_ptr(), &mut complete), EasenseStatus::Ok, "{}", last_error());
        assert_eq!(complete, 1);
        let mut store = ptr::null_mut();
        assert_eq!(easense_store_open(dir_c.as_ptr(), &mut store), EasenseStatus::Ok);
        let mut rep = ptr::null_mut();
        assert_eq!(easense_store_report(store, metric.as_ptr(), &mut rep), EasenseStatus::Ok, "{}", last_error());
        let k = easense_report_len(rep);
        assert_eq!(k, 7);
        let mut name = [0 as std::ffi::c_char; 32];
        assert_eq!(easense_report_param(rep, 0, name.as_mut_ptr(), name.len()), EasenseStatus::Ok);
        assert_eq!(CStr::from_ptr(name.as_ptr()).to_str().unwrap(), "lambda");
        let mut dn = vec![0.0; k];
        let mut ranks = vec![0usize; k];
        assert_eq!(
            easense_report_values(rep, ptr::null_mut(), ptr::null_mut(), dn.as_mut_ptr(), ptr::null_mut(), ranks.as_mut_ptr(), k),
            EasenseStatus::Ok
        );
        assert!(dn.iter().all(|v| (0.0..=1.0).contains(v)));
        let mut sorted = ranks.clone();
        sorted.sort();
        assert_eq!(sorted, (1..=k).collect::<Vec<_>>());
        let hv_metric = CString::new("hv").unwrap();
        let mut none = ptr::null_mut();
        assert_ne!(easense_store_report(store, hv_metric.as_ptr(), &mut none), EasenseStatus::Ok);
        easense_report_free(rep);
        easense_store_free(store);
    }
}

//! C ABI over the easense library.
//!
//! Every call returns an `EasenseStatus`; on failure the message is kept per
//! thread and can be read with `easense_last_error`. Objects cross the boundary
//! as opaque handles owned by the caller and released with their `_free`
//! function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use easense::indices::SensitivityReport;
use easense::metrics::Metric;
use easense::problems::Problem;
use easense::runner::{run_experiment, ExperimentConfig, RunOptions, Store};
use easense::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EasenseStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    Config = 4,
    UnknownProblem = 5,
    CorruptStore = 6,
    Io = 7,
    Degenerate = 8,
    Unsupported = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

/// A benchmark problem.
pub struct EasenseProblem(Problem);

/// An experiment store opened for analysis.
pub struct EasenseStore(Store);

/// Sensitivity indices of one (method, metric) analysis.
pub struct EasenseReport(SensitivityReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> EasenseStatus {
    match e {
        Error::Config(_) | Error::PopulationTooSmall { .. } | Error::InvalidSpace(_) | Error::InvalidGrid(_) => {
            EasenseStatus::Config
        }
        Error::UnknownProblem(_) => EasenseStatus::UnknownProblem,
        Error::CorruptStore(_) => EasenseStatus::CorruptStore,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => EasenseStatus::Io,
        Error::DegenerateModel { .. } | Error::UndefinedMetric(_) => EasenseStatus::Degenerate,
        Error::Unsupported(_) => EasenseStatus::Unsupported,
        Error::Shape { .. } | Error::InvalidInput(_) => EasenseStatus::InvalidInput,
    }
}

enum Fail {
    Status(EasenseStatus, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> EasenseStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            EasenseStatus::Ok
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(&msg);
            s
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            EasenseStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(EasenseStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Status(EasenseStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, need: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    if len < need {
        return Err(Fail::Status(EasenseStatus::BufferTooSmall, format!("`{what}` holds {len}, need {need}")));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn easense_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn easense_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Looks up a benchmark problem by id (e.g. `"rastrigin_n10"`, `"dtlz2_m3_n10"`).
///
/// # Safety
/// `id` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn easense_problem_new(id: *const c_char, out: *mut *mut EasenseProblem) -> EasenseStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = Problem::by_id(str_arg(id, "id")?)?;
        *out = Box::into_raw(Box::new(EasenseProblem(p)));
        Ok(())
    })
}

/// # Safety
/// `p` must come from `easense_problem_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn easense_problem_free(p: *mut EasenseProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Decision-space dimension and objective count.
///
/// # Safety
/// `p` must be a live problem handle; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn easense_problem_shape(p: *const EasenseProblem, dim: *mut usize, n_obj: *mut usize) -> EasenseStatus {
    guard(|| {
        let p = handle(p, "problem")?;
        if dim.is_null() || n_obj.is_null() {
            return Err(null("out"));
        }
        *dim = p.0.dim();
        *n_obj = p.0.n_obj();
        Ok(())
    })
}

/// Evaluates `x` (length `dim`, clamped into the box) into `out` (capacity `out_len >= n_obj`).
///
/// # Safety
/// `x` must point to `x_len` doubles and `out` to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn easense_problem_evaluate(
    p: *const EasenseProblem,
    x: *const f64,
    x_len: usize,
    out: *mut f64,
    out_len: usize,
) -> EasenseStatus {
    guard(|| {
        let p = handle(p, "problem")?;
        let x = slice_arg(x, x_len, "x")?;
        let v = p.0.evaluate(x)?.value;
        out_slice(out, out_len, v.len(), "out")?.copy_from_slice(&v);
        Ok(())
    })
}

/// Exact hypervolume of `count` points of dimension `m` (row-major) against `reference`.
///
/// # Safety
/// `points` must hold `count * m` doubles and `reference` `m` doubles.
#[no_mangle]
pub unsafe extern "C" fn easense_hypervolume(
    points: *const f64,
    count: usize,
    m: usize,
    reference: *const f64,
    out: *mut f64,
) -> EasenseStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let flat = slice_arg(points, count * m, "points")?;
        let r = slice_arg(reference, m, "reference")?;
        let rows: Vec<Vec<f64>> = if m == 0 { Vec::new() } else { flat.chunks(m).map(<[f64]>::to_vec).collect() };
        *out = easense::metrics::hv(&rows, r)?;
        Ok(())
    })
}

/// Runs or resumes the experiment in a TOML/JSON config file. `complete` is
/// set to 1 when every cell is done and reports were written.
///
/// # Safety
/// `config_path` must be a valid C string; `complete` may be null.
#[no_mangle]
pub unsafe extern "C" fn easense_run_experiment(config_path: *const c_char, complete: *mut i32) -> EasenseStatus {
    guard(|| {
        let cfg = ExperimentConfig::load(Path::new(str_arg(config_path, "config_path")?))?;
        let out = run_experiment(&cfg, &RunOptions::default())?;
        if !complete.is_null() {
            *complete = i32::from(out.complete);
        }
        Ok(())
    })
}

/// # Safety
/// `dir` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn easense_store_open(dir: *const c_char, out: *mut *mut EasenseStore) -> EasenseStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let s = Store::open(Path::new(str_arg(dir, "dir")?))?;
        *out = Box::into_raw(Box::new(EasenseStore(s)));
        Ok(())
    })
}

/// # Safety
/// `s` must come from `easense_store_open` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn easense_store_free(s: *mut EasenseStore) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Computes the report for `metric` (`"best"`, `"gd"`, `"igd"` or `"hv"`).
///
/// # Safety
/// `s` must be a live store handle; `metric` a valid C string; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn easense_store_report(
    s: *const EasenseStore,
    metric: *const c_char,
    out: *mut *mut EasenseReport,
) -> EasenseStatus {
    guard(|| {
        let s = handle(s, "store")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let metric: Metric = str_arg(metric, "metric")?.parse()?;
        let r = s.0.report(metric)?;
        *out = Box::into_raw(Box::new(EasenseReport(r)));
        Ok(())
    })
}

/// # Safety
/// `r` must come from `easense_store_report` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn easense_report_free(r: *mut EasenseReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of hyperparameters, or 0 for a null handle.
///
/// # Safety
/// `r` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn easense_report_len(r: *const EasenseReport) -> usize {
    r.as_ref().map_or(0, |r| r.0.params.len())
}

/// Copies the NUL-terminated name of parameter `i` into `buf`.
///
/// # Safety
/// `r` must be a live report handle and `buf` hold `buf_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn easense_report_param(
    r: *const EasenseReport,
    i: usize,
    buf: *mut c_char,
    buf_len: usize,
) -> EasenseStatus {
    guard(|| {
        let r = handle(r, "report")?;
        let name = r.0.params.get(i).ok_or_else(|| {
            Fail::Status(EasenseStatus::InvalidInput, format!("parameter {i} out of range"))
        })?;
        let dst = out_slice(buf.cast::<u8>(), buf_len, name.len() + 1, "buf")?;
        dst[..name.len()].copy_from_slice(name.as_bytes());
        dst[name.len()] = 0;
        Ok(())
    })
}

/// Per-parameter values in parameter order: raw direct and interaction
/// indices, their normalized forms, and 1-based ranks.
///
/// # Safety
/// `r` must be a live report handle; each non-null array must hold `len`
/// elements. Null arrays are skipped.
#[no_mangle]
pub unsafe extern "C" fn easense_report_values(
    r: *const EasenseReport,
    direct: *mut f64,
    interaction: *mut f64,
    direct_norm: *mut f64,
    interaction_norm: *mut f64,
    ranks: *mut usize,
    len: usize,
) -> EasenseStatus {
    guard(|| {
        let r = &handle(r, "report")?.0;
        let k = r.params.len();
        let arrays = [(direct, &r.direct), (interaction, &r.interaction), (direct_norm, &r.direct_norm), (interaction_norm, &r.interaction_norm)];
        for (p, src) in arrays {
            if !p.is_null() {
                out_slice(p, len, k, "values")?.copy_from_slice(src);
            }
        }
        if !ranks.is_null() {
            out_slice(ranks, len, k, "ranks")?.copy_from_slice(&r.ranks());
        }
        Ok(())
    })
}

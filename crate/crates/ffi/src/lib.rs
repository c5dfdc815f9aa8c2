//! C ABI for the electroconvection laboratory.
//!
//! Handles are opaque; every function returns an `EcsimStatus` (or a
//! value with an out-parameter) and never unwinds across the boundary.
//! String outputs are allocated by Rust and must be released with
//! `ecsim_string_free`. `ecsim_last_error` describes the most recent
//! failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use electroconvection::app;
use electroconvection::config::{parse_config, RunConfig};
use electroconvection::diagnostics::series_table;
use electroconvection::error::Error;
use electroconvection::evolution;
use electroconvection::report::{build_verdict, series_csv, VerdictReport};
use electroconvection::trajectory::Trajectory;

/// Result codes; nonzero mirrors the CLI exit codes where applicable.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcsimStatus {
    Ok = 0,
    DiagnosticFailure = 1,
    InvalidConfig = 2,
    Blowup = 3,
    NullPointer = 4,
    InvalidUtf8 = 5,
    IoError = 6,
    Internal = 7,
}

/// Parsed, validated run configuration.
pub struct EcsimConfig {
    inner: RunConfig,
}

/// A completed run: trajectory, diagnostic table, verdict.
pub struct EcsimRun {
    cfg: RunConfig,
    trajectory: Trajectory,
    report: VerdictReport,
    csv: String,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> EcsimStatus {
    match err {
        Error::Config(_) | Error::InvalidArgument(_) => EcsimStatus::InvalidConfig,
        Error::BlowUp { .. } => EcsimStatus::Blowup,
        Error::Io(_) => EcsimStatus::IoError,
        _ => EcsimStatus::Internal,
    }
}

fn guard(body: impl FnOnce() -> EcsimStatus) -> EcsimStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            EcsimStatus::Internal
        }
    }
}

/// Crate version as a static string; do not free.
#[no_mangle]
pub extern "C" fn ecsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the last failure on this thread; valid until the
/// next failing call on the same thread. Do not free.
#[no_mangle]
pub extern "C" fn ecsim_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Releases a string allocated by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by an ecsim function that
/// documents `ecsim_string_free`, and not freed before.
#[no_mangle]
pub unsafe extern "C" fn ecsim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a JSON run configuration. On success writes a new handle to
/// `out`; release it with `ecsim_config_free`.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn ecsim_config_parse(
    json: *const c_char,
    out: *mut *mut EcsimConfig,
) -> EcsimStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            set_error("null pointer argument");
            return EcsimStatus::NullPointer;
        }
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(_) => {
                set_error("configuration text is not valid UTF-8");
                return EcsimStatus::InvalidUtf8;
            }
        };
        match parse_config(text) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(EcsimConfig { inner: cfg }));
                EcsimStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// # Safety
/// `cfg` must come from `ecsim_config_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ecsim_config_free(cfg: *mut EcsimConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Canonical SHA-256 hash of the configuration, hex-encoded; release
/// with `ecsim_string_free`.
///
/// # Safety
/// `cfg` must be a live handle from `ecsim_config_parse`.
#[no_mangle]
pub unsafe extern "C" fn ecsim_config_hash(cfg: *const EcsimConfig) -> *mut c_char {
    if cfg.is_null() {
        return std::ptr::null_mut();
    }
    CString::new((*cfg).inner.hash()).map_or(std::ptr::null_mut(), CString::into_raw)
}

/// Integrates the configured problem and evaluates its diagnostics.
/// On success writes a run handle to `out`; release it with
/// `ecsim_run_free`. Returns `DiagnosticFailure` (with a valid handle)
/// when the verdict contains failing entries.
///
/// # Safety
/// `cfg` must be a live config handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ecsim_run_execute(
    cfg: *const EcsimConfig,
    out: *mut *mut EcsimRun,
) -> EcsimStatus {
    guard(|| {
        if cfg.is_null() || out.is_null() {
            set_error("null pointer argument");
            return EcsimStatus::NullPointer;
        }
        let cfg = &(*cfg).inner;
        let trajectory = match evolution::run(cfg) {
            Ok(t) => t,
            Err(e) => {
                set_error(&e.to_string());
                return status_of(&e);
            }
        };
        let report = match build_verdict(cfg, &trajectory) {
            Ok(r) => r,
            Err(e) => {
                set_error(&e.to_string());
                return status_of(&e);
            }
        };
        let rows = series_table(&trajectory, cfg.alpha, cfg.epsilon);
        let failed = report.failed();
        *out = Box::into_raw(Box::new(EcsimRun {
            cfg: cfg.clone(),
            trajectory,
            report,
            csv: series_csv(&rows),
        }));
        if failed {
            set_error("one or more diagnostics failed; inspect the verdict");
            EcsimStatus::DiagnosticFailure
        } else {
            EcsimStatus::Ok
        }
    })
}

/// # Safety
/// `run` must come from `ecsim_run_execute` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ecsim_run_free(run: *mut EcsimRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of stored snapshots.
///
/// # Safety
/// `run` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn ecsim_run_snapshot_count(run: *const EcsimRun) -> usize {
    if run.is_null() {
        return 0;
    }
    (*run).trajectory.len()
}

/// Time of snapshot `index`; writes into `out`.
///
/// # Safety
/// `run` must be a live run handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ecsim_run_time(
    run: *const EcsimRun,
    index: usize,
    out: *mut f64,
) -> EcsimStatus {
    if run.is_null() || out.is_null() {
        return EcsimStatus::NullPointer;
    }
    match (*run).trajectory.times().get(index) {
        Some(&t) => {
            *out = t;
            EcsimStatus::Ok
        }
        None => {
            set_error("snapshot index out of range");
            EcsimStatus::InvalidConfig
        }
    }
}

/// L² norm of snapshot `index`; writes into `out`.
///
/// # Safety
/// `run` must be a live run handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ecsim_run_l2_norm(
    run: *const EcsimRun,
    index: usize,
    out: *mut f64,
) -> EcsimStatus {
    if run.is_null() || out.is_null() {
        return EcsimStatus::NullPointer;
    }
    match (*run).trajectory.snapshots().get(index) {
        Some(s) => {
            *out = s.l2_norm();
            EcsimStatus::Ok
        }
        None => {
            set_error("snapshot index out of range");
            EcsimStatus::InvalidConfig
        }
    }
}

/// 1 when the verdict contains failing entries, else 0.
///
/// # Safety
/// `run` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn ecsim_run_failed(run: *const EcsimRun) -> i32 {
    if run.is_null() {
        return 0;
    }
    (*run).report.failed() as i32
}

/// Verdict report as JSON; release with `ecsim_string_free`.
///
/// # Safety
/// `run` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn ecsim_run_verdict_json(run: *const EcsimRun) -> *mut c_char {
    if run.is_null() {
        return std::ptr::null_mut();
    }
    CString::new((*run).report.to_json()).map_or(std::ptr::null_mut(), CString::into_raw)
}

/// Diagnostic series as CSV text; release with `ecsim_string_free`.
///
/// # Safety
/// `run` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn ecsim_run_series_csv(run: *const EcsimRun) -> *mut c_char {
    if run.is_null() {
        return std::ptr::null_mut();
    }
    CString::new((*run).csv.clone()).map_or(std::ptr::null_mut(), CString::into_raw)
}

/// Writes config.json, series.csv, verdict.json and the snapshot files
/// into `dir` (created if needed), the same layout as the CLI.
///
/// # Safety
/// `run` must be a live run handle; `dir` a valid NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn ecsim_run_write_outputs(
    run: *const EcsimRun,
    dir: *const c_char,
) -> EcsimStatus {
    guard(|| {
        if run.is_null() || dir.is_null() {
            set_error("null pointer argument");
            return EcsimStatus::NullPointer;
        }
        let dir = match CStr::from_ptr(dir).to_str() {
            Ok(d) => PathBuf::from(d),
            Err(_) => {
                set_error("output path is not valid UTF-8");
                return EcsimStatus::InvalidUtf8;
            }
        };
        let run = &*run;
        match app::write_run_outputs(&dir, &run.cfg, &run.trajectory, &run.report) {
            Ok(()) => EcsimStatus::Ok,
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Runs the built-in check suite; `Ok` when every check passes.
#[no_mangle]
pub extern "C" fn ecsim_selftest() -> EcsimStatus {
    guard(|| {
        let outcomes = electroconvection::selftest::run_all();
        let failed: Vec<&str> = outcomes
            .iter()
            .filter(|o| !o.passed)
            .map(|o| o.name)
            .collect();
        if failed.is_empty() {
            EcsimStatus::Ok
        } else {
            set_error(&format!("selftest failures: {}", failed.join(", ")));
            EcsimStatus::DiagnosticFailure
        }
    })
}

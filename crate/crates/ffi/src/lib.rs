//! C interface to `edqueue`.
//!
//! Objects are opaque handles created by `edq_*_new`/`edq_simulate`/... and
//! released with the matching `edq_*_free`. Every fallible call returns an
//! [`EdqStatus`]; on failure `edq_last_error()` describes the problem until
//! the next failing call on the same thread.
//!
//! Array outputs use a two-call pattern: pass `buf = NULL` to learn the
//! length through `len`, then call again with a buffer of that size.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use edqueue::fitting::{self, Alpha, FitResult, ModelParams, ModelSpec};
use edqueue::sim::{self, SimulationConfig, SimulationTrace};
use edqueue::stats::{self, Binning, Histogram};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdqStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidConfig = 2,
    InvalidArgument = 3,
    EmptyData = 4,
    FitFailed = 5,
    BufferTooSmall = 6,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdqModel {
    Lognormal = 0,
    PlcutoffAlpha1 = 1,
    PlcutoffAlpha1_5 = 2,
}

impl From<EdqModel> for ModelSpec {
    fn from(m: EdqModel) -> Self {
        match m {
            EdqModel::Lognormal => ModelSpec::LogNormal,
            EdqModel::PlcutoffAlpha1 => ModelSpec::PowerLawCutoff(Alpha::One),
            EdqModel::PlcutoffAlpha1_5 => ModelSpec::PowerLawCutoff(Alpha::ThreeHalves),
        }
    }
}

pub struct EdqConfig(SimulationConfig);
pub struct EdqTrace(SimulationTrace);
pub struct EdqHistogram(Histogram);
pub struct EdqFit(FitResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: EdqStatus, msg: impl Into<String>) -> EdqStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> EdqStatus) -> EdqStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(EdqStatus::Panic, "internal panic"))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> EdqStatus {
    *out = Box::into_raw(Box::new(value));
    EdqStatus::Ok
}

unsafe fn copy_out(values: &[f64], buf: *mut f64, cap: usize, len: *mut usize) -> EdqStatus {
    if len.is_null() {
        return fail(EdqStatus::NullArgument, "len is null");
    }
    *len = values.len();
    if buf.is_null() {
        return EdqStatus::Ok;
    }
    if cap < values.len() {
        return fail(
            EdqStatus::BufferTooSmall,
            format!("buffer holds {cap} values, need {}", values.len()),
        );
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    EdqStatus::Ok
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(EdqStatus::NullArgument, concat!(stringify!($p), " is null"));
        })+
    };
}

/// Message for the last failing call on this thread. Never NULL; valid
/// until the next failing call.
#[no_mangle]
pub extern "C" fn edq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a configuration with default values.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn edq_config_new(out: *mut *mut EdqConfig) -> EdqStatus {
    non_null!(out);
    write_out(out, EdqConfig(SimulationConfig::default()))
}

/// Parses `key = value` configuration text (NUL-terminated UTF-8).
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn edq_config_parse(
    text: *const c_char,
    out: *mut *mut EdqConfig,
) -> EdqStatus {
    non_null!(text, out);
    guard(|| {
        let Ok(text) = CStr::from_ptr(text).to_str() else {
            return fail(EdqStatus::InvalidArgument, "config text is not UTF-8");
        };
        match SimulationConfig::parse(text) {
            Ok(c) => write_out(out, EdqConfig(c)),
            Err(e) => fail(EdqStatus::InvalidConfig, e.to_string()),
        }
    })
}

/// Offered load `lambda / mu` of a configuration.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn edq_config_traffic_intensity(
    config: *const EdqConfig,
    out: *mut f64,
) -> EdqStatus {
    non_null!(config, out);
    *out = (*config).0.traffic_intensity();
    EdqStatus::Ok
}

/// # Safety
/// `config` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn edq_config_free(config: *mut EdqConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs the queue model.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn edq_simulate(
    config: *const EdqConfig,
    out: *mut *mut EdqTrace,
) -> EdqStatus {
    non_null!(config, out);
    guard(|| match sim::simulate(&(*config).0) {
        Ok(t) => write_out(out, EdqTrace(t)),
        Err(e) => fail(EdqStatus::InvalidConfig, e.to_string()),
    })
}

/// Counts of accepted, rejected and still-queued manuscripts. Any output
/// pointer may be NULL.
///
/// # Safety
/// `trace` must be a live handle; non-NULL outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn edq_trace_counts(
    trace: *const EdqTrace,
    accepted: *mut usize,
    rejected: *mut usize,
    in_queue: *mut usize,
) -> EdqStatus {
    non_null!(trace);
    let t = &(*trace).0;
    for (p, v) in [
        (accepted, t.accepted.len()),
        (rejected, t.rejected.len()),
        (in_queue, t.in_queue_at_end.len()),
    ] {
        if !p.is_null() {
            *p = v;
        }
    }
    EdqStatus::Ok
}

/// Waiting times of accepted manuscripts, in acceptance order. Warm-up
/// meetings are skipped unless `include_warmup` is non-zero.
///
/// # Safety
/// `trace` must be a live handle, `len` valid, `buf` NULL or `cap` long.
#[no_mangle]
pub unsafe extern "C" fn edq_trace_waiting_times(
    trace: *const EdqTrace,
    include_warmup: i32,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> EdqStatus {
    non_null!(trace);
    let sample = stats::waiting_times(&(*trace).0, include_warmup != 0);
    copy_out(&sample.values, buf, cap, len)
}

/// # Safety
/// `trace` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn edq_trace_free(trace: *mut EdqTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Normalized histogram with bins `[0, w), [w, 2w), ...` covering the sample.
///
/// # Safety
/// `values` must point to `n` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn edq_histogram_linear(
    values: *const f64,
    n: usize,
    width: f64,
    out: *mut *mut EdqHistogram,
) -> EdqStatus {
    non_null!(values, out);
    guard(|| {
        let values = std::slice::from_raw_parts(values, n);
        match stats::histogram(values, &Binning::Linear { width }) {
            Ok(h) => write_out(out, EdqHistogram(h)),
            Err(stats::StatsError::EmptySample) => fail(EdqStatus::EmptyData, "empty sample"),
            Err(e) => fail(EdqStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `hist` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn edq_histogram_n_bins(
    hist: *const EdqHistogram,
    out: *mut usize,
) -> EdqStatus {
    non_null!(hist, out);
    *out = (*hist).0.n_bins();
    EdqStatus::Ok
}

/// Edges, count and density of bin `i`. Any output pointer may be NULL.
///
/// # Safety
/// `hist` must be a live handle; non-NULL outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn edq_histogram_bin(
    hist: *const EdqHistogram,
    i: usize,
    left: *mut f64,
    right: *mut f64,
    count: *mut u64,
    density: *mut f64,
) -> EdqStatus {
    non_null!(hist);
    let h = &(*hist).0;
    if i >= h.n_bins() {
        return fail(
            EdqStatus::InvalidArgument,
            format!("bin {i} out of range ({} bins)", h.n_bins()),
        );
    }
    if !left.is_null() {
        *left = h.bin_edges[i];
    }
    if !right.is_null() {
        *right = h.bin_edges[i + 1];
    }
    if !count.is_null() {
        *count = h.counts[i];
    }
    if !density.is_null() {
        *density = h.densities[i];
    }
    EdqStatus::Ok
}

/// # Safety
/// `hist` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn edq_histogram_free(hist: *mut EdqHistogram) {
    if !hist.is_null() {
        drop(Box::from_raw(hist));
    }
}

/// Least-squares fit of `model` to the histogram's non-empty bins, starting
/// from moment-based guesses.
///
/// # Safety
/// `hist` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn edq_fit(
    hist: *const EdqHistogram,
    model: EdqModel,
    out: *mut *mut EdqFit,
) -> EdqStatus {
    non_null!(hist, out);
    guard(|| match fitting::fit(&(*hist).0, model.into(), None) {
        Ok(f) => write_out(out, EdqFit(f)),
        Err(e @ (fitting::FitError::TooFewBins(_) | fitting::FitError::EmptySample)) => {
            fail(EdqStatus::EmptyData, e.to_string())
        }
        Err(e) => fail(EdqStatus::FitFailed, e.to_string()),
    })
}

/// Fitted parameters. Log-normal: `p0, A, t_c, varpi`. Cutoff power law:
/// `A, alpha, t0`.
///
/// # Safety
/// `fit` must be a live handle, `len` valid, `buf` NULL or `cap` long.
#[no_mangle]
pub unsafe extern "C" fn edq_fit_params(
    fit: *const EdqFit,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> EdqStatus {
    non_null!(fit);
    let values = match (*fit).0.params {
        ModelParams::LogNormal(p) => vec![p.p0, p.amplitude, p.t_c, p.varpi],
        ModelParams::PowerLawCutoff(p) => vec![p.amplitude, p.alpha.value(), p.t0],
    };
    copy_out(&values, buf, cap, len)
}

/// Fit quality. `r_squared` is NaN when undefined (all densities equal).
/// Any output pointer may be NULL.
///
/// # Safety
/// `fit` must be a live handle; non-NULL outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn edq_fit_quality(
    fit: *const EdqFit,
    sse: *mut f64,
    r_squared: *mut f64,
    converged: *mut i32,
) -> EdqStatus {
    non_null!(fit);
    let f = &(*fit).0;
    if !sse.is_null() {
        *sse = f.sse;
    }
    if !r_squared.is_null() {
        *r_squared = f.r_squared.unwrap_or(f64::NAN);
    }
    if !converged.is_null() {
        *converged = f.converged as i32;
    }
    EdqStatus::Ok
}

/// # Safety
/// `fit` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn edq_fit_free(fit: *mut EdqFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

//! C ABI over `privacy-frontier`.
//!
//! Every fallible call returns a [`PfStatus`]. On failure a message is kept
//! per thread and can be read with [`pf_last_error_message`]. Strings handed
//! out by this library must be released with [`pf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use privacy_frontier::cli::{self, EnumerateView, NumberMode, Problem};
use privacy_frontier::oracle::{cross_check_with_cap, CrossCheckReport};
use privacy_frontier::rational::{format_rational, to_f64};
use privacy_frontier::semichain::{enumerate_extreme_posteriors, Enumeration};
use privacy_frontier::signals::decompose_into_extremes;
use privacy_frontier::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    TooLarge = 5,
    NotMember = 6,
    IndexOutOfRange = 7,
    BufferTooSmall = 8,
    Internal = 9,
    Panic = 10,
}

/// A parsed problem (graph, prior, budget).
pub struct PfProblem(Problem);

/// The extreme posteriors of a problem.
pub struct PfEnumeration {
    problem: Problem,
    inner: Enumeration,
}

/// Outcome of comparing the enumeration with the vertex oracle.
pub struct PfReport {
    problem: Problem,
    inner: CrossCheckReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(msg).expect("nul bytes removed")));
}

fn status_of(e: &Error) -> PfStatus {
    match e {
        Error::Parse(_) => PfStatus::Parse,
        Error::InstanceTooLarge { .. } => PfStatus::TooLarge,
        Error::NotMember => PfStatus::NotMember,
        Error::IndexOutOfRange { .. } => PfStatus::IndexOutOfRange,
        e if e.is_internal() => PfStatus::Internal,
        _ => PfStatus::InvalidInput,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), (PfStatus, String)>) -> PfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside privacy-frontier");
            PfStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (PfStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (PfStatus, String) {
    (PfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (PfStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| (PfStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (PfStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), (PfStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), (PfStatus, String)> {
    let c = CString::new(s).map_err(|_| (PfStatus::Internal, "string contains a nul byte".to_string()))?;
    write_out(out, c.into_raw())
}

/// Message for the last failed call on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn pf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn pf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON problem description.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_problem_from_json(json: *const c_char, out: *mut *mut PfProblem) -> PfStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let problem = cli::parse_problem(text).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(PfProblem(problem))))
    })
}

/// # Safety
/// `p` must come from [`pf_problem_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn pf_problem_free(p: *mut PfProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of states, or 0 for null.
///
/// # Safety
/// `p` must be a live problem or null.
#[no_mangle]
pub unsafe extern "C" fn pf_problem_num_states(p: *const PfProblem) -> usize {
    p.as_ref().map_or(0, |p| p.0.states().len())
}

/// Enumerates the extreme posteriors.
///
/// # Safety
/// `p` must be a live problem; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_enumerate(p: *const PfProblem, out: *mut *mut PfEnumeration) -> PfStatus {
    guard(|| {
        let problem = &deref(p, "problem")?.0;
        let inner = enumerate_extreme_posteriors(&problem.graph, &problem.prior, &problem.budget).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(PfEnumeration { problem: problem.clone(), inner })))
    })
}

/// # Safety
/// `e` must come from [`pf_enumerate`] or be null.
#[no_mangle]
pub unsafe extern "C" fn pf_enumeration_free(e: *mut PfEnumeration) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Number of records (1 when the budget is degenerate), or 0 for null.
///
/// # Safety
/// `e` must be a live enumeration or null.
#[no_mangle]
pub unsafe extern "C" fn pf_enumeration_len(e: *const PfEnumeration) -> usize {
    e.as_ref().map_or(0, |e| e.inner.len())
}

fn record_probs(e: &PfEnumeration, index: usize) -> Result<(&[privacy_frontier::rational::Rational], usize), (PfStatus, String)> {
    let out_of_range = || (PfStatus::IndexOutOfRange, format!("record {index} of {}", e.inner.len()));
    match &e.inner {
        Enumeration::Degenerate(mu) if index == 0 => Ok((mu.probs(), 1)),
        Enumeration::Degenerate(_) => Err(out_of_range()),
        Enumeration::Extreme { records, .. } => {
            let r = records.get(index).ok_or_else(out_of_range)?;
            Ok((r.posterior.probs(), r.chain.num_levels()))
        }
    }
}

/// Number of levels of record `index`.
///
/// # Safety
/// `e` must be a live enumeration; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_enumeration_num_levels(e: *const PfEnumeration, index: usize, out: *mut usize) -> PfStatus {
    guard(|| {
        let (_, levels) = record_probs(deref(e, "enumeration")?, index)?;
        write_out(out, levels)
    })
}

/// Copies record `index` as doubles into `buf`, which must hold one entry per state.
///
/// # Safety
/// `e` must be a live enumeration; `buf` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pf_enumeration_posterior_f64(
    e: *const PfEnumeration,
    index: usize,
    buf: *mut f64,
    len: usize,
) -> PfStatus {
    guard(|| {
        let (probs, _) = record_probs(deref(e, "enumeration")?, index)?;
        if buf.is_null() {
            return Err(null("buffer"));
        }
        if len < probs.len() {
            return Err((PfStatus::BufferTooSmall, format!("need {} entries, got {len}", probs.len())));
        }
        let dst = std::slice::from_raw_parts_mut(buf, probs.len());
        for (d, p) in dst.iter_mut().zip(probs) {
            *d = to_f64(p);
        }
        Ok(())
    })
}

/// Record `index` as exact fractions, comma-separated. Free with [`pf_string_free`].
///
/// # Safety
/// `e` must be a live enumeration; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_enumeration_posterior_exact(
    e: *const PfEnumeration,
    index: usize,
    out: *mut *mut c_char,
) -> PfStatus {
    guard(|| {
        let (probs, _) = record_probs(deref(e, "enumeration")?, index)?;
        write_string(out, probs.iter().map(format_rational).collect::<Vec<_>>().join(","))
    })
}

/// The full enumeration as JSON (exact fractions). Free with [`pf_string_free`].
///
/// # Safety
/// `e` must be a live enumeration; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_enumeration_to_json(e: *const PfEnumeration, out: *mut *mut c_char) -> PfStatus {
    guard(|| {
        let e = deref(e, "enumeration")?;
        let value = cli::enumeration_json(&e.problem, &e.inner, EnumerateView::default());
        write_string(out, value.to_string())
    })
}

/// Compares the enumeration with the vertex oracle on problems of at most `cap` states.
///
/// # Safety
/// `p` must be a live problem; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_verify(p: *const PfProblem, cap: usize, out: *mut *mut PfReport) -> PfStatus {
    guard(|| {
        let problem = &deref(p, "problem")?.0;
        let inner = cross_check_with_cap(&problem.graph, &problem.prior, &problem.budget, cap).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(PfReport { problem: problem.clone(), inner })))
    })
}

/// # Safety
/// `r` must come from [`pf_verify`] or be null.
#[no_mangle]
pub unsafe extern "C" fn pf_report_free(r: *mut PfReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// True when both vertex sets agree and no two chains share a posterior.
///
/// # Safety
/// `r` must be a live report or null.
#[no_mangle]
pub unsafe extern "C" fn pf_report_is_match(r: *const PfReport) -> bool {
    r.as_ref().is_some_and(|r| r.inner.is_match())
}

/// Number of vertices found by the oracle, or 0 for null.
///
/// # Safety
/// `r` must be a live report or null.
#[no_mangle]
pub unsafe extern "C" fn pf_report_oracle_vertices(r: *const PfReport) -> usize {
    r.as_ref().map_or(0, |r| r.inner.oracle_vertices.len())
}

/// The report as JSON. Free with [`pf_string_free`].
///
/// # Safety
/// `r` must be a live report; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pf_report_to_json(r: *const PfReport, out: *mut *mut c_char) -> PfStatus {
    guard(|| {
        let r = deref(r, "report")?;
        write_string(out, cli::report_json(&r.problem, &r.inner, None).to_string())
    })
}

/// Decomposes `posterior` (comma-separated fractions) into extreme posteriors; JSON out.
///
/// # Safety
/// `p` must be a live problem; `posterior` a nul-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pf_decompose(p: *const PfProblem, posterior: *const c_char, out: *mut *mut c_char) -> PfStatus {
    guard(|| {
        let problem = &deref(p, "problem")?.0;
        let mu = cli::parse_posterior(read_str(posterior, "posterior")?, problem.states().len()).map_err(lib_err)?;
        let signal = decompose_into_extremes(&mu, &problem.graph, &problem.prior, &problem.budget).map_err(|e| {
            let (status, msg) = lib_err(e);
            if status == PfStatus::NotMember {
                (status, format!("{msg}\n{}", cli::describe_violations(problem, &mu)))
            } else {
                (status, msg)
            }
        })?;
        write_string(out, cli::signal_json(&mu, &signal, NumberMode::Exact).to_string())
    })
}

//! C interface: opaque handles for test functions and suite reports, status codes for
//! every call, and a thread-local message for the most recent failure.
//!
//! Strings passed in are NUL-terminated UTF-8. Strings passed out are copied into
//! caller buffers; `needed` receives the size including the terminating NUL.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use colombeau_core::assoc::{build_formula, registry};
use colombeau_core::cli::{run_suite, Report, SuiteConfig};
use colombeau_core::dist_core::oracle_pair;
use colombeau_core::smooth_kit::{Smooth, TestFunction};
use colombeau_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColombeauStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    UnknownFormula = 4,
    InvalidParams = 5,
    Numerical = 6,
    BufferTooSmall = 7,
    OutOfRange = 8,
    Panic = 9,
}

/// Opaque test function handle.
pub struct ColombeauTestFunction(TestFunction);

/// Opaque suite report handle.
pub struct ColombeauReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> ColombeauStatus {
    match e {
        Error::Config(_) | Error::Parse(_) => ColombeauStatus::Config,
        Error::UnknownFormula(_) => ColombeauStatus::UnknownFormula,
        Error::InvalidParams { .. } => ColombeauStatus::InvalidParams,
        _ => ColombeauStatus::Numerical,
    }
}

type FfiResult = Result<(), ColombeauStatus>;

fn fail(e: Error) -> ColombeauStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn guard(f: impl FnOnce() -> FfiResult) -> ColombeauStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ColombeauStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            ColombeauStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), ColombeauStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        Err(ColombeauStatus::NullPointer)
    } else {
        Ok(())
    }
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, ColombeauStatus> {
    non_null(s, what)?;
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        ColombeauStatus::InvalidUtf8
    })
}

/// Copy `s` with a NUL into `buf`; `needed` gets the full size either way.
unsafe fn copy_out(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> FfiResult {
    let n = s.len() + 1;
    if !needed.is_null() {
        *needed = n;
    }
    if buf.is_null() || len < n {
        return Err(ColombeauStatus::BufferTooSmall);
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf as *mut u8, s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

unsafe fn write_str(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> FfiResult {
    copy_out(s, buf, len, needed).inspect_err(|_| {
        set_error(format!(
            "buffer of {len} bytes is too small, {} needed",
            s.len() + 1
        ));
    })
}

/// Copy the message of the most recent failure on this thread into `buf`.
/// The message itself is left in place, so a size query can precede the copy.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes; `needed` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn colombeau_last_error(
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> ColombeauStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    match copy_out(&msg, buf, len, needed) {
        Ok(()) => ColombeauStatus::Ok,
        Err(s) => s,
    }
}

/// Number of registered formulas.
#[no_mangle]
pub extern "C" fn colombeau_formula_count() -> usize {
    registry().len()
}

/// Identifier of the registered formula at `index`.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes; `needed` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn colombeau_formula_id(
    index: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> ColombeauStatus {
    guard(|| {
        let f = registry().get(index).ok_or_else(|| {
            set_error(format!("formula index {index} out of range"));
            ColombeauStatus::OutOfRange
        })?;
        write_str(f.id, buf, len, needed)
    })
}

/// `ψ(x) = P(x) b((x - center)/radius)` with `P` given by `n` coefficients, lowest first.
///
/// # Safety
/// `id` must be a NUL-terminated string, `poly` valid for `n` reads, `out` valid for a write.
/// The handle must be released with [`colombeau_test_function_free`].
#[no_mangle]
pub unsafe extern "C" fn colombeau_test_function_new(
    id: *const c_char,
    poly: *const f64,
    n: usize,
    center: f64,
    radius: f64,
    out: *mut *mut ColombeauTestFunction,
) -> ColombeauStatus {
    guard(|| {
        non_null(out, "out")?;
        let id = read_str(id, "id")?;
        let coeffs = if n == 0 {
            Vec::new()
        } else {
            non_null(poly, "poly")?;
            std::slice::from_raw_parts(poly, n).to_vec()
        };
        let t = TestFunction::new(id, coeffs, center, radius).map_err(fail)?;
        *out = Box::into_raw(Box::new(ColombeauTestFunction(t)));
        Ok(())
    })
}

/// One of the built-in test functions: 0 even, 1 odd-shifted, 2 generic.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn colombeau_test_function_default(
    kind: u32,
    out: *mut *mut ColombeauTestFunction,
) -> ColombeauStatus {
    guard(|| {
        non_null(out, "out")?;
        let t = match kind {
            0 => TestFunction::even(),
            1 => TestFunction::odd_shifted(),
            2 => TestFunction::generic(),
            _ => {
                set_error(format!("no built-in test function {kind}"));
                return Err(ColombeauStatus::OutOfRange);
            }
        };
        *out = Box::into_raw(Box::new(ColombeauTestFunction(t)));
        Ok(())
    })
}

/// `ψ⁽ⁿ⁾(x)`.
///
/// # Safety
/// `tf` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn colombeau_test_function_eval(
    tf: *const ColombeauTestFunction,
    n: usize,
    x: f64,
    out: *mut f64,
) -> ColombeauStatus {
    guard(|| {
        non_null(tf, "tf")?;
        non_null(out, "out")?;
        *out = (*tf).0.deriv(n, x).map_err(fail)?;
        Ok(())
    })
}

/// # Safety
/// `tf` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn colombeau_test_function_free(tf: *mut ColombeauTestFunction) {
    if !tf.is_null() {
        drop(Box::from_raw(tf));
    }
}

/// Exact pairing of the predicted side of a registered formula with ψ.
/// `p` and `q` may be null when the formula does not take them.
///
/// # Safety
/// `formula` must be a NUL-terminated string; `p`, `q` null or valid; `tf` a live
/// handle; `re`, `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn colombeau_oracle(
    formula: *const c_char,
    p: *const i32,
    q: *const u32,
    tf: *const ColombeauTestFunction,
    re: *mut f64,
    im: *mut f64,
) -> ColombeauStatus {
    guard(|| {
        let id = read_str(formula, "formula")?;
        non_null(tf, "tf")?;
        non_null(re, "re")?;
        non_null(im, "im")?;
        let p = (!p.is_null()).then(|| *p);
        let q = (!q.is_null()).then(|| *q);
        let f = build_formula(id, p, q).map_err(fail)?;
        let v = oracle_pair(&f.predicted, &(*tf).0).map_err(fail)?;
        *re = v.re;
        *im = v.im;
        Ok(())
    })
}

/// Run a suite from a TOML configuration; null or empty text runs the default suite.
///
/// # Safety
/// `config_toml` must be null or a NUL-terminated string; `out` valid for a write.
/// The report must be released with [`colombeau_report_free`].
#[no_mangle]
pub unsafe extern "C" fn colombeau_run_suite(
    config_toml: *const c_char,
    out: *mut *mut ColombeauReport,
) -> ColombeauStatus {
    guard(|| {
        non_null(out, "out")?;
        let cfg = if config_toml.is_null() {
            SuiteConfig::default()
        } else {
            SuiteConfig::from_toml(read_str(config_toml, "config_toml")?).map_err(fail)?
        };
        let report = run_suite(&cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(ColombeauReport(report)));
        Ok(())
    })
}

/// Verdict and pass counts; the suite passes when they are equal.
///
/// # Safety
/// `report` must be a live handle; `verdicts`, `passed` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn colombeau_report_summary(
    report: *const ColombeauReport,
    verdicts: *mut usize,
    passed: *mut usize,
) -> ColombeauStatus {
    guard(|| {
        non_null(report, "report")?;
        non_null(verdicts, "verdicts")?;
        non_null(passed, "passed")?;
        let s = &(*report).0.summary;
        *verdicts = s.verdicts;
        *passed = s.passed;
        Ok(())
    })
}

/// The full report as JSON.
///
/// # Safety
/// `report` must be a live handle; `buf` null or valid for `len` bytes; `needed` null or valid.
#[no_mangle]
pub unsafe extern "C" fn colombeau_report_json(
    report: *const ColombeauReport,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> ColombeauStatus {
    guard(|| {
        non_null(report, "report")?;
        write_str(&(*report).0.to_json(), buf, len, needed)
    })
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn colombeau_report_free(report: *mut ColombeauReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

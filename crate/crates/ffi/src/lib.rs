//! C interface to qlab. Every function returns a `QlabStatus`; on failure the message is
//! available from `qlab_last_error` until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qlab::harness::{format_summary, Harness, RunConfig, Summary};
use qlab::star::{parse_symbol, star, FormalSymbol};
use qlab::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QlabStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Config = 3,
    GridGuard = 4,
    Parse = 5,
    Numeric = 6,
    Io = 7,
    Panic = 8,
}

/// Cached projector ladders shared by runs.
pub struct QlabHarness(Harness);

pub struct QlabConfig(RunConfig);

pub struct QlabSummary(Summary);

pub struct QlabSymbol(FormalSymbol);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QlabStatus {
    match e {
        Error::Config(_) => QlabStatus::Config,
        Error::GridGuard(_) => QlabStatus::GridGuard,
        Error::Parse { .. } => QlabStatus::Parse,
        Error::Io(_) => QlabStatus::Io,
        _ => QlabStatus::Numeric,
    }
}

struct Fail(QlabStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QlabStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QlabStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            QlabStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(QlabStatus::NullArgument, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Fail(QlabStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message of the last failed call on this thread, or null. Owned by the library.
#[no_mangle]
pub extern "C" fn qlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn qlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn qlab_harness_new() -> *mut QlabHarness {
    Box::into_raw(Box::new(QlabHarness(Harness::new())))
}

/// # Safety
/// `h` must come from `qlab_harness_new` or be null.
#[no_mangle]
pub unsafe extern "C" fn qlab_harness_free(h: *mut QlabHarness) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Parses and validates a JSON run configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlab_config_from_json(json: *const c_char, out: *mut *mut QlabConfig) -> QlabStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let cfg = RunConfig::from_json(text(json, "json")?)?;
        *out = Box::into_raw(Box::new(QlabConfig(cfg)));
        Ok(())
    })
}

/// # Safety
/// `c` must come from `qlab_config_from_json` or be null.
#[no_mangle]
pub unsafe extern "C" fn qlab_config_free(c: *mut QlabConfig) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Runs the configured suite. A suite whose assertions fail still returns `Ok`; query
/// `qlab_summary_passed`.
///
/// # Safety
/// Handles must be valid; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlab_run(
    h: *const QlabHarness,
    cfg: *const QlabConfig,
    out: *mut *mut QlabSummary,
) -> QlabStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let h = handle(h, "harness")?;
        let cfg = handle(cfg, "config")?;
        let s = h.0.run(&cfg.0)?;
        *out = Box::into_raw(Box::new(QlabSummary(s)));
        Ok(())
    })
}

/// # Safety
/// `s` must be a valid summary handle and `passed` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlab_summary_passed(s: *const QlabSummary, passed: *mut bool) -> QlabStatus {
    guard(|| {
        *out_ptr(passed, "passed")? = handle(s, "summary")?.0.passed;
        Ok(())
    })
}

/// Counts assertions and failed assertions.
///
/// # Safety
/// `s` must be a valid summary handle; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qlab_summary_counts(
    s: *const QlabSummary,
    total: *mut usize,
    failed: *mut usize,
) -> QlabStatus {
    guard(|| {
        let s = &handle(s, "summary")?.0;
        *out_ptr(total, "total")? = s.suites.iter().map(|r| r.assertions.len()).sum();
        *out_ptr(failed, "failed")? = s.suites.iter().map(|r| r.failures().count()).sum();
        Ok(())
    })
}

/// Summary as JSON (`json = true`) or as the one-line-per-assertion text. Free with
/// `qlab_string_free`.
///
/// # Safety
/// `s` must be a valid summary handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlab_summary_render(s: *const QlabSummary, json: bool, out: *mut *mut c_char) -> QlabStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let s = &handle(s, "summary")?.0;
        let body = if json {
            serde_json::to_string_pretty(s).map_err(|e| Fail(QlabStatus::Io, e.to_string()))?
        } else {
            format_summary(s)
        };
        *out = owned_string(body);
        Ok(())
    })
}

/// # Safety
/// `s` must come from `qlab_run` or be null.
#[no_mangle]
pub unsafe extern "C" fn qlab_summary_free(s: *mut QlabSummary) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Parses a symbol in the record text format.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlab_symbol_parse(src: *const c_char, out: *mut *mut QlabSymbol) -> QlabStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let sym = parse_symbol(text(src, "src")?)?;
        *out = Box::into_raw(Box::new(QlabSymbol(sym)));
        Ok(())
    })
}

/// Exact product `a ⋆ b`.
///
/// # Safety
/// Handles must be valid and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlab_symbol_star(
    a: *const QlabSymbol,
    b: *const QlabSymbol,
    out: *mut *mut QlabSymbol,
) -> QlabStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let p = star(&handle(a, "a")?.0, &handle(b, "b")?.0)?;
        *out = Box::into_raw(Box::new(QlabSymbol(p)));
        Ok(())
    })
}

/// # Safety
/// Handles must be valid and `equal` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlab_symbol_equal(a: *const QlabSymbol, b: *const QlabSymbol, equal: *mut bool) -> QlabStatus {
    guard(|| {
        *out_ptr(equal, "equal")? = handle(a, "a")?.0 == handle(b, "b")?.0;
        Ok(())
    })
}

/// Record text of the symbol; free with `qlab_string_free`.
///
/// # Safety
/// `s` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qlab_symbol_to_string(s: *const QlabSymbol, out: *mut *mut c_char) -> QlabStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        *out = owned_string(handle(s, "symbol")?.0.to_string());
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn qlab_symbol_free(s: *mut QlabSymbol) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

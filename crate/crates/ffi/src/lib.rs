//! C ABI over the match runner and the transcript verifier.
//!
//! Handles are opaque. Every fallible call returns a [`GlStatus`]; the
//! message of the most recent failure on the calling thread is available
//! from [`gl_last_error`]. Strings returned to the caller are owned by the
//! caller and released with [`gl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gridlocal::adversary::{AdversaryParams, AdversaryStrategy, StrategyKind};
use gridlocal::algos::algorithm_by_name;
use gridlocal::geometry::Slope;
use gridlocal::harness::{run_match, MatchConfig, MatchResult, MatchStatus, Transcript};
use gridlocal::verify::verify;
use gridlocal::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    BudgetExhausted = 4,
    Internal = 5,
    Transcript = 6,
    VerifyFailed = 7,
    Panic = 8,
}

/// Match parameters. `theta_dy / theta_dx` is the slope.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GlParams {
    pub t: u32,
    pub kappa: u32,
    pub l0: u64,
    pub l1: u64,
    pub budget: u64,
    pub theta_dy: i64,
    pub theta_dx: i64,
    pub trials: u32,
    /// Nonzero enables the coordinate backdoor.
    pub backdoor: u8,
}

/// Finished match.
pub struct GlMatch {
    inner: MatchResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> GlStatus {
    match e {
        Error::Domain(_) => GlStatus::InvalidConfig,
        Error::BudgetExhausted { .. } => GlStatus::BudgetExhausted,
        Error::Io(_) | Error::Json(_) | Error::Transcript(_) => GlStatus::Transcript,
        Error::Protocol(_) | Error::Construction(_) => GlStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (GlStatus, String)>) -> GlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GlStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("panic inside the library");
            GlStatus::Panic
        }
    }
}

fn fail(e: Error) -> (GlStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, (GlStatus, String)> {
    if p.is_null() {
        return Err((GlStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (GlStatus::InvalidUtf8, "argument is not UTF-8".into()))
}

fn owned(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// The desk-scale defaults.
#[no_mangle]
pub extern "C" fn gl_params_default() -> GlParams {
    let p = AdversaryParams::default();
    GlParams {
        t: p.t,
        kappa: p.kappa,
        l0: p.l0,
        l1: p.l1,
        budget: p.budget,
        theta_dy: p.theta.dy,
        theta_dx: p.theta.dx,
        trials: p.trials,
        backdoor: 0,
    }
}

/// Message of the last failure on this thread. Valid until the next call
/// into the library from the same thread.
#[no_mangle]
pub extern "C" fn gl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Plays one match and stores the handle in `*out`.
///
/// # Safety
/// `strategy` and `algo` must be NUL-terminated strings, `params` and `out`
/// valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gl_run(
    strategy: *const c_char,
    algo: *const c_char,
    params: *const GlParams,
    seed: u64,
    out: *mut *mut GlMatch,
) -> GlStatus {
    guard(|| {
        if params.is_null() || out.is_null() {
            return Err((GlStatus::NullPointer, "null params or out".into()));
        }
        *out = ptr::null_mut();
        let kind: StrategyKind = text(strategy)?.parse().map_err(fail)?;
        let gp = *params;
        let name = text(algo)?;
        let a = algorithm_by_name(name, gp.backdoor != 0)
            .ok_or_else(|| (GlStatus::InvalidConfig, format!("unknown algorithm {name:?}")))?;
        let p = AdversaryParams {
            t: gp.t,
            kappa: gp.kappa,
            l0: gp.l0,
            l1: gp.l1,
            budget: gp.budget,
            theta: Slope::new(gp.theta_dy, gp.theta_dx).map_err(fail)?,
            trials: gp.trials,
            ..AdversaryParams::default()
        };
        p.check_positive().map_err(fail)?;
        let s = AdversaryStrategy::new(kind, p, seed);
        let cfg = MatchConfig { t: p.t, budget: p.budget, seed, grid: None, backdoor: gp.backdoor != 0 };
        let m = run_match(a.as_ref(), &s, &cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(GlMatch { inner: m }));
        Ok(())
    })
}

/// 1 if the adversary won, 0 if the algorithm survived, 2 if the budget ran
/// out, -1 on a null handle.
///
/// # Safety
/// `m` must be null or a handle from [`gl_run`].
#[no_mangle]
pub unsafe extern "C" fn gl_match_outcome(m: *const GlMatch) -> i32 {
    match m.as_ref() {
        None => -1,
        Some(m) => match m.inner.status {
            MatchStatus::Won => 1,
            MatchStatus::Survived => 0,
            MatchStatus::BudgetExhausted => 2,
        },
    }
}

/// Cells charged to the budget.
///
/// # Safety
/// `m` must be null or a handle from [`gl_run`].
#[no_mangle]
pub unsafe extern "C" fn gl_match_spent(m: *const GlMatch) -> u64 {
    m.as_ref().map_or(0, |m| m.inner.spent)
}

/// Largest |p| the adversary observed.
///
/// # Safety
/// `m` must be null or a handle from [`gl_run`].
#[no_mangle]
pub unsafe extern "C" fn gl_match_peak_potential(m: *const GlMatch) -> i64 {
    m.as_ref().map_or(0, |m| m.inner.peak_potential)
}

/// Certificate kind ("improper_edge", "potential_violation", "survived").
///
/// # Safety
/// `m` must be a handle from [`gl_run`]; `out` a valid pointer. The string
/// is freed with [`gl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn gl_match_certificate(m: *const GlMatch, out: *mut *mut c_char) -> GlStatus {
    guard(|| {
        let (Some(m), false) = (m.as_ref(), out.is_null()) else {
            return Err((GlStatus::NullPointer, "null handle or out".into()));
        };
        *out = owned(m.inner.certificate.kind().into());
        Ok(())
    })
}

/// The transcript as JSON lines.
///
/// # Safety
/// As for [`gl_match_certificate`].
#[no_mangle]
pub unsafe extern "C" fn gl_match_transcript(m: *const GlMatch, out: *mut *mut c_char) -> GlStatus {
    guard(|| {
        let (Some(m), false) = (m.as_ref(), out.is_null()) else {
            return Err((GlStatus::NullPointer, "null handle or out".into()));
        };
        *out = owned(m.inner.transcript.to_jsonl());
        Ok(())
    })
}

/// Re-checks a JSON-lines transcript. On a failed check the offending
/// event index goes to `*bad_event` (if not null), otherwise -1.
///
/// # Safety
/// `jsonl` must be a NUL-terminated string; `bad_event` null or valid.
#[no_mangle]
pub unsafe extern "C" fn gl_verify_jsonl(jsonl: *const c_char, bad_event: *mut i64) -> GlStatus {
    if !bad_event.is_null() {
        *bad_event = -1;
    }
    guard(|| {
        let tr = Transcript::from_jsonl(text(jsonl)?).map_err(fail)?;
        verify(&tr).map_err(|e| {
            if !bad_event.is_null() {
                *bad_event = e.event as i64;
            }
            (GlStatus::VerifyFailed, e.to_string())
        })?;
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle from [`gl_run`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn gl_match_free(m: *mut GlMatch) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn gl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

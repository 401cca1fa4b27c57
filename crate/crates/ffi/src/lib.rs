//! C ABI over `ipcopula`.
//!
//! Objects cross the boundary as opaque handles created from JSON and
//! released with the matching `_free`. Every call returns an [`IpcStatus`];
//! on failure [`ipc_last_error_message`] describes the error for the calling
//! thread. Strings returned through out-parameters are owned by the caller
//! and must be released with [`ipc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ipcopula::combine::{natural_extension, sklar_combine, Linkage};
use ipcopula::icopula::CopulaSet;
use ipcopula::io::{from_json, BiPBoxJson, CopulaSetJson, PBoxJson};
use ipcopula::pbox::{coherence_check, BiPBox, CoherenceOutcome, PBox};

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    InvalidArgument = 4,
    Panic = 5,
}

/// Univariate p-box.
pub struct IpcPBox(PBox);

/// Bivariate p-box.
pub struct IpcBiPBox(BiPBox);

/// Finite set of copulas with its validation resolution.
pub struct IpcCopulaSet(CopulaSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(IpcStatus, String);

type Call = Result<(), Failure>;

fn guard(f: impl FnOnce() -> Call) -> IpcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IpcStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            IpcStatus::Panic
        }
    }
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure(IpcStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Failure(IpcStatus::InvalidUtf8, e.to_string()))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(IpcStatus::NullPointer, format!("null {name} handle")))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Call {
    if out.is_null() {
        return Err(Failure(IpcStatus::NullPointer, "null output pointer".into()));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn store_string(out: *mut *mut c_char, s: String) -> Call {
    if out.is_null() {
        return Err(Failure(IpcStatus::NullPointer, "null output pointer".into()));
    }
    let c = CString::new(s).map_err(|e| Failure(IpcStatus::InvalidArgument, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

fn invalid(e: impl ToString) -> Failure {
    Failure(IpcStatus::InvalidInput, e.to_string())
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn ipc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ipc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `{"grid", "lower", "upper"}`.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ipc_pbox_from_json(json: *const c_char, out: *mut *mut IpcPBox) -> IpcStatus {
    guard(|| {
        let j: PBoxJson = from_json(text(json)?).map_err(invalid)?;
        store(out, IpcPBox(j.to_pbox("").map_err(invalid)?))
    })
}

/// # Safety
/// `p` must be null or a live handle from [`ipc_pbox_from_json`].
#[no_mangle]
pub unsafe extern "C" fn ipc_pbox_free(p: *mut IpcPBox) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Parses `{"xgrid", "ygrid", "lower", "upper"}`.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ipc_bipbox_from_json(json: *const c_char, out: *mut *mut IpcBiPBox) -> IpcStatus {
    guard(|| {
        let j: BiPBoxJson = from_json(text(json)?).map_err(invalid)?;
        store(out, IpcBiPBox(j.to_bipbox("").map_err(invalid)?))
    })
}

/// Serializes a bivariate p-box in the same schema it is parsed from.
///
/// # Safety
/// `b` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ipc_bipbox_to_json(b: *const IpcBiPBox, out: *mut *mut c_char) -> IpcStatus {
    guard(|| {
        let b = handle(b, "bipbox")?;
        let s = serde_json::to_string(&BiPBoxJson::of(&b.0)).map_err(invalid)?;
        store_string(out, s)
    })
}

/// # Safety
/// `b` must be null or a live bivariate p-box handle.
#[no_mangle]
pub unsafe extern "C" fn ipc_bipbox_free(b: *mut IpcBiPBox) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Parses `{"members": [...]}` and validates every member at `resolution`.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ipc_copula_set_from_json(
    json: *const c_char,
    resolution: u32,
    out: *mut *mut IpcCopulaSet,
) -> IpcStatus {
    guard(|| {
        if resolution == 0 {
            return Err(Failure(IpcStatus::InvalidArgument, "resolution must be positive".into()));
        }
        let j: CopulaSetJson = from_json(text(json)?).map_err(invalid)?;
        store(out, IpcCopulaSet(j.to_set("", resolution as usize).map_err(invalid)?))
    })
}

/// # Safety
/// `s` must be null or a live copula set handle.
#[no_mangle]
pub unsafe extern "C" fn ipc_copula_set_free(s: *mut IpcCopulaSet) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Frechet-Hoeffding bounds of two marginal p-boxes.
///
/// # Safety
/// `x` and `y` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ipc_natural_extension(
    x: *const IpcPBox,
    y: *const IpcPBox,
    out: *mut *mut IpcBiPBox,
) -> IpcStatus {
    guard(|| {
        let (x, y) = (handle(x, "x pbox")?, handle(y, "y pbox")?);
        store(out, IpcBiPBox(natural_extension(&x.0, &y.0)))
    })
}

/// Joins marginal p-boxes through every copula of a set.
///
/// # Safety
/// All handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ipc_sklar_combine(
    x: *const IpcPBox,
    y: *const IpcPBox,
    set: *const IpcCopulaSet,
    out: *mut *mut IpcBiPBox,
) -> IpcStatus {
    guard(|| {
        let (x, y, set) = (handle(x, "x pbox")?, handle(y, "y pbox")?, handle(set, "copula set")?);
        store(out, IpcBiPBox(sklar_combine(&x.0, &y.0, Linkage::Set(&set.0))))
    })
}

/// Writes 1 to `coherent` when every bound is attained by a joint pmf, else 0.
/// For an incoherent box the last error message names the failing point.
///
/// # Safety
/// `b` must be a live handle; `coherent` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ipc_coherence_check(b: *const IpcBiPBox, coherent: *mut i32) -> IpcStatus {
    let mut witness = None;
    let status = guard(|| {
        let b = handle(b, "bipbox")?;
        if coherent.is_null() {
            return Err(Failure(IpcStatus::NullPointer, "null output pointer".into()));
        }
        let outcome = coherence_check(&b.0);
        if let CoherenceOutcome::Incoherent(w) = &outcome {
            witness = Some(w.describe(b.0.xgrid(), b.0.ygrid()));
        }
        *coherent = i32::from(outcome.is_coherent());
        Ok(())
    });
    if let Some(w) = witness {
        set_error(w);
    }
    status
}

/// Runs every embedded worked example and returns the JSON report, byte
/// identical to `ipcopula reproduce-paper --seed <seed> --resolution <r>`.
///
/// # Safety
/// `out_json` and `out_exit` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ipc_reproduce(
    seed: u64,
    resolution: u32,
    out_json: *mut *mut c_char,
    out_exit: *mut i32,
) -> IpcStatus {
    guard(|| {
        if out_exit.is_null() {
            return Err(Failure(IpcStatus::NullPointer, "null output pointer".into()));
        }
        let outcome = ipcopula::cli::run([
            "ipcopula".to_string(),
            "reproduce-paper".into(),
            "--seed".into(),
            seed.to_string(),
            "--resolution".into(),
            resolution.to_string(),
        ]);
        if outcome.code == 2 {
            return Err(Failure(IpcStatus::InvalidArgument, outcome.stderr.trim().to_string()));
        }
        *out_exit = outcome.code;
        store_string(out_json, outcome.stdout)
    })
}

//! C ABI over the bm-moment library.
//!
//! Scenarios are held behind an opaque handle created from JSON text or a
//! file path; every call returns a status code and writes results through
//! out-pointers. String results are heap-allocated and must be released with
//! [`bm_string_free`]; handles with [`bm_scenario_free`]. The most recent
//! error message per thread is available via [`bm_last_error_message`].

use bm_moment::desing::{build_profile, compute_a_eps, desing_primitive, DesingFamily};
use bm_moment::hamiltonian::{moment_eval, validate_assumptions};
use bm_moment::scenario::{load_scenario, load_scenario_str, run_scenario, Scenario};
use libc::c_char;
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

/// Status codes of every fallible call. `BM_STATUS_OK` is zero; the
/// run-specific codes mirror the CLI exit contract.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BmStatus {
    Ok = 0,
    CheckFailed = 1,
    InvalidInput = 2,
    ValidationFailed = 3,
    NullPointer = 4,
    PanicCaught = 5,
}

/// Opaque scenario handle.
pub struct BmScenario {
    inner: Scenario,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let cstring = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

fn read_cstr<'a>(ptr: *const c_char) -> Option<&'a str> {
    if ptr.is_null() {
        return None;
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().ok()
}

/// Library version as a static string (do not free).
#[no_mangle]
pub extern "C" fn bm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Most recent error message on this thread, or null. Free the result with
/// [`bm_string_free`].
#[no_mangle]
pub extern "C" fn bm_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be null or a string returned by this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn bm_string_free(s: *mut c_char) {
    if !s.is_null() {
        unsafe {
            let _ = CString::from_raw(s);
        }
    }
}

fn load_with(loader: impl FnOnce() -> bm_moment::Result<Scenario>) -> *mut BmScenario {
    let result = catch_unwind(AssertUnwindSafe(loader));
    match result {
        Ok(Ok(inner)) => Box::into_raw(Box::new(BmScenario { inner })),
        Ok(Err(e)) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("panic while loading scenario".into());
            std::ptr::null_mut()
        }
    }
}

/// Parses a scenario from JSON text. Returns null on error (see
/// [`bm_last_error_message`]).
///
/// # Safety
/// `json` must be null or point to a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bm_scenario_load_json(json: *const c_char) -> *mut BmScenario {
    let Some(text) = read_cstr(json) else {
        set_error("null or non-UTF-8 JSON pointer".into());
        return std::ptr::null_mut();
    };
    load_with(|| load_scenario_str(text))
}

/// Loads a scenario from a file path or bundled scenario name. Returns null
/// on error.
///
/// # Safety
/// `path` must be null or point to a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bm_scenario_load_path(path: *const c_char) -> *mut BmScenario {
    let Some(path) = read_cstr(path) else {
        set_error("null or non-UTF-8 path pointer".into());
        return std::ptr::null_mut();
    };
    load_with(|| load_scenario(path))
}

/// Releases a scenario handle.
///
/// # Safety
/// `scenario` must be null or a handle from a load call that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn bm_scenario_free(scenario: *mut BmScenario) {
    if !scenario.is_null() {
        unsafe {
            let _ = Box::from_raw(scenario);
        }
    }
}

/// Scenario name; free with [`bm_string_free`].
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bm_scenario_name(scenario: *const BmScenario) -> *mut c_char {
    if scenario.is_null() {
        return std::ptr::null_mut();
    }
    let s = unsafe { &*scenario };
    CString::new(s.inner.name.clone())
        .map(CString::into_raw)
        .unwrap_or(std::ptr::null_mut())
}

/// Validates the standing assumptions of the model.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bm_scenario_validate(scenario: *const BmScenario) -> BmStatus {
    if scenario.is_null() {
        return BmStatus::NullPointer;
    }
    let s = unsafe { &*scenario };
    let report = validate_assumptions(&s.inner.model);
    if report.all_passed() {
        BmStatus::Ok
    } else {
        let msgs: Vec<String> = report
            .failures()
            .iter()
            .map(|f| format!("[{}] {}", f.name, f.detail))
            .collect();
        set_error(msgs.join("; "));
        BmStatus::ValidationFailed
    }
}

/// Runs the scenario into `out_dir` (clouds, hulls and report.json) and
/// returns the run exit code: 0 all checks passed, 1 check failure,
/// 2 input/IO error, 3 validation failure.
///
/// # Safety
/// `scenario` must be null or a live handle; `out_dir` must be null or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn bm_scenario_run(
    scenario: *const BmScenario,
    out_dir: *const c_char,
) -> i32 {
    if scenario.is_null() {
        set_error("null scenario handle".into());
        return BmStatus::NullPointer as i32;
    }
    let Some(dir) = read_cstr(out_dir) else {
        set_error("null or non-UTF-8 output directory".into());
        return BmStatus::NullPointer as i32;
    };
    let s = unsafe { &*scenario };
    let result = catch_unwind(AssertUnwindSafe(|| run_scenario(&s.inner, Path::new(dir))));
    match result {
        Ok(Ok((_, code))) => code,
        Ok(Err(e)) => {
            set_error(e.to_string());
            BmStatus::InvalidInput as i32
        }
        Err(_) => {
            set_error("panic while running scenario".into());
            BmStatus::PanicCaught as i32
        }
    }
}

/// Divergence scale of the desingularized moment image at smoothing width
/// `eps`.
///
/// # Safety
/// `scenario` must be null or a live handle; `out` must be null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn bm_scenario_a_eps(
    scenario: *const BmScenario,
    eps: f64,
    out: *mut f64,
) -> BmStatus {
    if scenario.is_null() || out.is_null() {
        return BmStatus::NullPointer;
    }
    let s = unsafe { &*scenario };
    match catch_unwind(AssertUnwindSafe(|| compute_a_eps(&s.inner.model, eps))) {
        Ok(Ok(a)) => {
            unsafe { *out = a };
            BmStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(e.to_string());
            BmStatus::InvalidInput
        }
        Err(_) => BmStatus::PanicCaught,
    }
}

/// Singular moment map value: `leaf` must hold `d - 1` coordinates of a
/// point inside the leaf polytope, `out` must hold `d` slots.
///
/// # Safety
/// `leaf` must point to `leaf_len` readable doubles (or be null with `leaf_len` 0); `out` must point to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bm_scenario_moment_eval(
    scenario: *const BmScenario,
    x_or_theta: f64,
    leaf: *const f64,
    leaf_len: usize,
    out: *mut f64,
    out_len: usize,
) -> BmStatus {
    if scenario.is_null() || out.is_null() || (leaf.is_null() && leaf_len > 0) {
        return BmStatus::NullPointer;
    }
    let s = unsafe { &*scenario };
    let d = s.inner.model.torus.d;
    if out_len < d {
        set_error(format!("output buffer holds {out_len} slots, need {d}"));
        return BmStatus::InvalidInput;
    }
    let leaf_point: &[f64] = if leaf_len == 0 {
        &[]
    } else {
        unsafe { std::slice::from_raw_parts(leaf, leaf_len) }
    };
    match catch_unwind(AssertUnwindSafe(|| {
        moment_eval(&s.inner.model, x_or_theta, leaf_point)
    })) {
        Ok(Ok(value)) => {
            let out = unsafe { std::slice::from_raw_parts_mut(out, d) };
            out.copy_from_slice(&value);
            BmStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(e.to_string());
            BmStatus::InvalidInput
        }
        Err(_) => BmStatus::PanicCaught,
    }
}

/// Desingularized replacement density for `x^-m` at smoothing width `eps`.
///
/// # Safety
/// `out` must be null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn bm_desing_density(m: u32, eps: f64, x: f64, out: *mut f64) -> BmStatus {
    if out.is_null() {
        return BmStatus::NullPointer;
    }
    match build_profile(m as usize, eps) {
        Ok(profile) => {
            unsafe { *out = profile.density(x) };
            BmStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            BmStatus::InvalidInput
        }
    }
}

/// Desingularized moment primitive `int_0^x sum_j w_j q_eps^(j)`.
///
/// # Safety
/// `weights` must point to `weights_len` readable doubles; `out` must be null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn bm_desing_primitive(
    eps: f64,
    weights: *const f64,
    weights_len: usize,
    x: f64,
    out: *mut f64,
) -> BmStatus {
    if out.is_null() || weights.is_null() || weights_len == 0 {
        return BmStatus::NullPointer;
    }
    let w = unsafe { std::slice::from_raw_parts(weights, weights_len) };
    match DesingFamily::new(weights_len, eps) {
        Ok(family) => {
            unsafe { *out = desing_primitive(&family, w, x) };
            BmStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            BmStatus::InvalidInput
        }
    }
}

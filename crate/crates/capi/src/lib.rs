//! C ABI for the bipolar fixed-point toolkit.
//!
//! Handles are opaque pointers created by the `*_parse` functions and
//! released by the matching `*_free`. Inputs and results travel as JSON
//! strings in the same schemas the `bfp` binary uses, so bindings in any
//! language can reuse one serializer. Every function returns a [`BfpStatus`];
//! on failure [`bfp_last_error_message`] holds a thread-local description
//! valid until the next call on the same thread.
//!
//! Strings returned through `out` parameters are owned by the caller and
//! must be released with [`bfp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use bfp_core::contraction::{verify_almost_pc, verify_pc, CoefficientFamily, ContractionSpec};
use bfp_core::io::{BvpConfigFile, CoeffFile, MapFile, SpaceFile};
use bfp_core::picard::{iterate, IterationConfig};
use bfp_core::space::{check_axioms, FiniteBipolarSpace};

/// Status codes shared by every API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// JSON or expression parsing failed.
    ParseError = 3,
    /// Inputs were structurally valid but semantically rejected.
    InputError = 4,
    /// Evaluation hit a domain error.
    DomainError = 5,
    /// The fractional solver detected divergence.
    Diverged = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let sanitized = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).ok();
    });
}

fn clear_error() {
    LAST_ERROR.with(|slot| slot.borrow_mut().take());
}

/// Last error message for the current thread, or null when the previous
/// call succeeded. The pointer is invalidated by the next API call.
#[no_mangle]
pub extern "C" fn bfp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(ptr::null())
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned through an `out` parameter of
/// this library, or null.
#[no_mangle]
pub unsafe extern "C" fn bfp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, BfpStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(BfpStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        BfpStatus::InvalidUtf8
    })
}

fn write_json<T: serde::Serialize>(value: &T, out: *mut *mut c_char) -> BfpStatus {
    let json = match serde_json::to_string(value) {
        Ok(json) => json,
        Err(err) => {
            set_error(format!("serialization failed: {err}"));
            return BfpStatus::InputError;
        }
    };
    match CString::new(json) {
        Ok(cstring) => {
            unsafe { *out = cstring.into_raw() };
            BfpStatus::Ok
        }
        Err(_) => {
            set_error("serialized JSON contained an interior NUL");
            BfpStatus::InputError
        }
    }
}

/// Opaque finite bipolar space handle.
pub struct BfpSpace {
    inner: FiniteBipolarSpace,
}

/// Opaque mapping handle, bound to the space it was parsed against.
pub struct BfpMap {
    inner: bfp_core::contraction::MappingSpec,
}

/// Opaque coefficient-family-plus-spec handle.
pub struct BfpCoeffs {
    family: CoefficientFamily,
    spec: ContractionSpec,
}

/// Parses a space from its JSON schema
/// (`{"left": [...], "right": [...], "overlap": [[i,j],...], "dist": [[...]]}`).
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bfp_space_parse(
    json: *const c_char,
    out: *mut *mut BfpSpace,
) -> BfpStatus {
    clear_error();
    if out.is_null() {
        set_error("null out pointer");
        return BfpStatus::NullPointer;
    }
    let text = match read_str(json) {
        Ok(text) => text,
        Err(status) => return status,
    };
    let file: SpaceFile = match serde_json::from_str(text) {
        Ok(file) => file,
        Err(err) => {
            set_error(format!("space json: {err}"));
            return BfpStatus::ParseError;
        }
    };
    match file.into_space() {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(BfpSpace { inner }));
            BfpStatus::Ok
        }
        Err(err) => {
            set_error(err.to_string());
            BfpStatus::InputError
        }
    }
}

/// # Safety
/// `space` must come from [`bfp_space_parse`] (or be null).
#[no_mangle]
pub unsafe extern "C" fn bfp_space_free(space: *mut BfpSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Runs the axiom checks and returns the report as JSON.
///
/// # Safety
/// `space` must be a live handle; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bfp_space_check_axioms(
    space: *const BfpSpace,
    out_json: *mut *mut c_char,
) -> BfpStatus {
    clear_error();
    if space.is_null() || out_json.is_null() {
        set_error("null argument");
        return BfpStatus::NullPointer;
    }
    let report = check_axioms(&(*space).inner);
    write_json(&report, out_json)
}

/// Distance lookup by labels.
///
/// # Safety
/// All pointers must be valid; `space` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bfp_space_distance(
    space: *const BfpSpace,
    left: *const c_char,
    right: *const c_char,
    out: *mut f64,
) -> BfpStatus {
    clear_error();
    if space.is_null() || out.is_null() {
        set_error("null argument");
        return BfpStatus::NullPointer;
    }
    let left = match read_str(left) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let right = match read_str(right) {
        Ok(s) => s,
        Err(status) => return status,
    };
    match (*space).inner.distance(left, right) {
        Ok(value) => {
            *out = value;
            BfpStatus::Ok
        }
        Err(err) => {
            set_error(err.to_string());
            BfpStatus::InputError
        }
    }
}

/// Parses a mapping from its JSON schema against an existing space.
///
/// # Safety
/// `space` must be a live handle; `json` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bfp_map_parse(
    space: *const BfpSpace,
    json: *const c_char,
    out: *mut *mut BfpMap,
) -> BfpStatus {
    clear_error();
    if space.is_null() || out.is_null() {
        set_error("null argument");
        return BfpStatus::NullPointer;
    }
    let text = match read_str(json) {
        Ok(text) => text,
        Err(status) => return status,
    };
    let file: MapFile = match serde_json::from_str(text) {
        Ok(file) => file,
        Err(err) => {
            set_error(format!("map json: {err}"));
            return BfpStatus::ParseError;
        }
    };
    match file.into_mapping(&(*space).inner) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(BfpMap { inner }));
            BfpStatus::Ok
        }
        Err(err) => {
            set_error(err.to_string());
            BfpStatus::InputError
        }
    }
}

/// # Safety
/// `map` must come from [`bfp_map_parse`] (or be null).
#[no_mangle]
pub unsafe extern "C" fn bfp_map_free(map: *mut BfpMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Parses a coefficient file (degree, pi, rho_index, Q, optional W/H, q).
///
/// # Safety
/// `json` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bfp_coeffs_parse(
    json: *const c_char,
    out: *mut *mut BfpCoeffs,
) -> BfpStatus {
    clear_error();
    if out.is_null() {
        set_error("null out pointer");
        return BfpStatus::NullPointer;
    }
    let text = match read_str(json) {
        Ok(text) => text,
        Err(status) => return status,
    };
    let file: CoeffFile = match serde_json::from_str(text) {
        Ok(file) => file,
        Err(err) => {
            set_error(format!("coeff json: {err}"));
            return BfpStatus::ParseError;
        }
    };
    match file.into_parts() {
        Ok((family, spec)) => {
            *out = Box::into_raw(Box::new(BfpCoeffs { family, spec }));
            BfpStatus::Ok
        }
        Err(err) => {
            set_error(err.to_string());
            BfpStatus::InputError
        }
    }
}

/// # Safety
/// `coeffs` must come from [`bfp_coeffs_parse`] (or be null).
#[no_mangle]
pub unsafe extern "C" fn bfp_coeffs_free(coeffs: *mut BfpCoeffs) {
    if !coeffs.is_null() {
        drop(Box::from_raw(coeffs));
    }
}

/// Certifies the contraction inequality; the full certificate is returned
/// as JSON. `almost` selects the almost variant (covariant maps only).
///
/// # Safety
/// All handles must be live; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bfp_verify_pc(
    space: *const BfpSpace,
    map: *const BfpMap,
    coeffs: *const BfpCoeffs,
    almost: bool,
    out_json: *mut *mut c_char,
) -> BfpStatus {
    clear_error();
    if space.is_null() || map.is_null() || coeffs.is_null() || out_json.is_null() {
        set_error("null argument");
        return BfpStatus::NullPointer;
    }
    let result = if almost {
        verify_almost_pc(
            &(*space).inner,
            &(*map).inner,
            &(*coeffs).family,
            &(*coeffs).spec,
        )
    } else {
        verify_pc(
            &(*space).inner,
            &(*map).inner,
            &(*coeffs).family,
            &(*coeffs).spec,
        )
    };
    match result {
        Ok(cert) => write_json(&cert, out_json),
        Err(err) => {
            set_error(err.to_string());
            BfpStatus::InputError
        }
    }
}

/// Runs the Picard bisequence from a start pair; the outcome (trace, status,
/// fixed point or cycle, observed distances) is returned as JSON.
///
/// # Safety
/// All handles and pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bfp_iterate(
    space: *const BfpSpace,
    map: *const BfpMap,
    start_left: *const c_char,
    start_right: *const c_char,
    max_iter: usize,
    out_json: *mut *mut c_char,
) -> BfpStatus {
    clear_error();
    if space.is_null() || map.is_null() || out_json.is_null() {
        set_error("null argument");
        return BfpStatus::NullPointer;
    }
    let start_left = match read_str(start_left) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let start_right = match read_str(start_right) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let config = IterationConfig {
        max_iter,
        tol: 1e-12,
        bound_params: None,
    };
    match iterate(&(*space).inner, &(*map).inner, start_left, start_right, &config) {
        Ok(outcome) => write_json(&outcome, out_json),
        Err(err) => {
            set_error(err.to_string());
            BfpStatus::InputError
        }
    }
}

/// Solves the fractional BVP from a JSON config
/// (`{"order":..,"omega":"..","sigma":..,"grid_n":..,"tol":..,"max_iter":..}`)
/// and returns the solve report as JSON.
///
/// # Safety
/// `config_json` and `out_json` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bfp_solve_frac(
    config_json: *const c_char,
    out_json: *mut *mut c_char,
) -> BfpStatus {
    clear_error();
    if out_json.is_null() {
        set_error("null out pointer");
        return BfpStatus::NullPointer;
    }
    let text = match read_str(config_json) {
        Ok(text) => text,
        Err(status) => return status,
    };
    let file: BvpConfigFile = match serde_json::from_str(text) {
        Ok(file) => file,
        Err(err) => {
            set_error(format!("bvp config json: {err}"));
            return BfpStatus::ParseError;
        }
    };
    let bvp = match file.into_bvp() {
        Ok(bvp) => bvp,
        Err(err) => {
            set_error(err.to_string());
            return BfpStatus::ParseError;
        }
    };
    match bfp_core::fractional::solve(&bvp) {
        Ok(report) => write_json(&report, out_json),
        Err(err @ bfp_core::fractional::FracError::Diverged { .. }) => {
            set_error(err.to_string());
            BfpStatus::Diverged
        }
        Err(err @ bfp_core::fractional::FracError::OmegaEval { .. }) => {
            set_error(err.to_string());
            BfpStatus::DomainError
        }
        Err(err) => {
            set_error(err.to_string());
            BfpStatus::InputError
        }
    }
}

/// Parses and evaluates an expression in the variables `rho` and `g`.
///
/// # Safety
/// `src` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bfp_expr_eval(
    src: *const c_char,
    rho: f64,
    g: f64,
    out: *mut f64,
) -> BfpStatus {
    clear_error();
    if out.is_null() {
        set_error("null out pointer");
        return BfpStatus::NullPointer;
    }
    let text = match read_str(src) {
        Ok(text) => text,
        Err(status) => return status,
    };
    let expr = match bfp_core::expr::parse(text) {
        Ok(expr) => expr,
        Err(err) => {
            set_error(err.to_string());
            return BfpStatus::ParseError;
        }
    };
    match bfp_core::expr::eval(&expr, rho, g) {
        Ok(value) => {
            *out = value;
            BfpStatus::Ok
        }
        Err(err) => {
            set_error(err.to_string());
            BfpStatus::DomainError
        }
    }
}

//! C ABI for the spectral field library.
//!
//! Fields travel as opaque handles owned by this library and are released
//! with `fm_field_free`. Strings returned through out-parameters are
//! NUL-terminated UTF-8 owned by the caller and released with
//! `fm_string_free`. Every entry point reports through `FmStatus`; after a
//! non-OK status, `fm_last_error` returns a message for the most recent
//! failure on the calling thread, valid until the next failing call there.
//! Panics never cross the boundary; they surface as `FM_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use finmode::classifier::{
    certificate_to_json, classify_euler, classify_nsc, nsc_certificate_to_json,
    stationarity_residual,
};
use finmode::generate;
use finmode::spectral_field::{parse, serialize, SpectralField};

/// Opaque spectral field handle.
pub struct FmField(SpectralField);

/// Result of every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A text argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The document did not parse as a field.
    ParseError = 3,
    /// The field violates a structural invariant.
    InvalidField = 4,
    /// Classification could not produce a certificate.
    ClassifyError = 5,
    /// Construction parameters were rejected.
    GenerateError = 6,
    /// Unexpected internal failure (caught panic).
    Internal = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: FmStatus, message: impl AsRef<str>) -> FmStatus {
    let sanitized = message.as_ref().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NUL stripped above");
    });
    status
}

fn guarded(body: impl FnOnce() -> FmStatus) -> FmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic across the C boundary".into());
            fail(FmStatus::Internal, message)
        }
    }
}

/// Message for the most recent failure on this thread, or an empty string.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fm_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn expect_field<'a>(field: *const FmField) -> Result<&'a SpectralField, FmStatus> {
    field
        .as_ref()
        .map(|handle| &handle.0)
        .ok_or_else(|| fail(FmStatus::NullArgument, "field handle is NULL"))
}

unsafe fn hand_out(out: *mut *mut FmField, field: SpectralField) -> FmStatus {
    if out.is_null() {
        return fail(FmStatus::NullArgument, "out pointer is NULL");
    }
    *out = Box::into_raw(Box::new(FmField(field)));
    FmStatus::Ok
}

unsafe fn hand_out_string(out: *mut *mut c_char, text: String) -> FmStatus {
    if out.is_null() {
        return fail(FmStatus::NullArgument, "out pointer is NULL");
    }
    match CString::new(text) {
        Ok(owned) => {
            *out = owned.into_raw();
            FmStatus::Ok
        }
        Err(_) => fail(FmStatus::Internal, "produced text with an interior NUL"),
    }
}

/// Parses a field document (JSON) into a new handle.
///
/// # Safety
/// `text` must point to a NUL-terminated buffer; `out` must be a valid
/// location for one pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_field_parse_json(
    text: *const c_char,
    out: *mut *mut FmField,
) -> FmStatus {
    guarded(|| {
        if text.is_null() {
            return fail(FmStatus::NullArgument, "text is NULL");
        }
        let raw = CStr::from_ptr(text);
        let document = match raw.to_str() {
            Ok(document) => document,
            Err(e) => return fail(FmStatus::InvalidUtf8, e.to_string()),
        };
        match parse(document) {
            Ok(field) => hand_out(out, field),
            Err(e) => fail(FmStatus::ParseError, e.to_string()),
        }
    })
}

/// Builds the three-amplitude curl eigenfield.
///
/// # Safety
/// `out` must be a valid location for one pointer.
#[no_mangle]
pub unsafe extern "C" fn fm_field_make_abc(
    a: f64,
    b: f64,
    c: f64,
    out: *mut *mut FmField,
) -> FmStatus {
    guarded(|| {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return fail(FmStatus::GenerateError, "amplitudes must be finite");
        }
        hand_out(out, generate::abc(a, b, c))
    })
}

/// Serializes a field into its canonical JSON document.
///
/// # Safety
/// `field` must be a live handle; `out` must be a valid location for one
/// pointer. The returned string is released with `fm_string_free`.
#[no_mangle]
pub unsafe extern "C" fn fm_field_to_json(
    field: *const FmField,
    out: *mut *mut c_char,
) -> FmStatus {
    guarded(|| {
        let field = match expect_field(field) {
            Ok(field) => field,
            Err(status) => return status,
        };
        match serialize(field) {
            Ok(document) => hand_out_string(out, document),
            Err(e) => fail(FmStatus::InvalidField, e.to_string()),
        }
    })
}

/// Checks the structural invariants; `tol <= 0` selects the default
/// tolerance. Violations are reported through `fm_last_error`.
///
/// # Safety
/// `field` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fm_field_validate(field: *const FmField, tol: f64) -> FmStatus {
    guarded(|| {
        let field = match expect_field(field) {
            Ok(field) => field,
            Err(status) => return status,
        };
        let report = field.validate(tol);
        if report.is_ok() {
            FmStatus::Ok
        } else {
            fail(FmStatus::InvalidField, report.to_string())
        }
    })
}

/// Number of frequencies carrying a coefficient.
///
/// # Safety
/// `field` must be a live handle; `out` must be a valid location.
#[no_mangle]
pub unsafe extern "C" fn fm_field_mode_count(
    field: *const FmField,
    out: *mut usize,
) -> FmStatus {
    guarded(|| {
        let field = match expect_field(field) {
            Ok(field) => field,
            Err(status) => return status,
        };
        if out.is_null() {
            return fail(FmStatus::NullArgument, "out pointer is NULL");
        }
        *out = field.modes().count();
        FmStatus::Ok
    })
}

/// Kinetic energy, half the sum of squared coefficient norms.
///
/// # Safety
/// `field` must be a live handle; `out` must be a valid location.
#[no_mangle]
pub unsafe extern "C" fn fm_field_energy(field: *const FmField, out: *mut f64) -> FmStatus {
    guarded(|| {
        let field = match expect_field(field) {
            Ok(field) => field,
            Err(status) => return status,
        };
        if out.is_null() {
            return fail(FmStatus::NullArgument, "out pointer is NULL");
        }
        *out = field.energy();
        FmStatus::Ok
    })
}

/// Relative stationarity residual of the ideal evolution.
///
/// # Safety
/// `field` must be a live handle; `out` must be a valid location.
#[no_mangle]
pub unsafe extern "C" fn fm_field_residual(field: *const FmField, out: *mut f64) -> FmStatus {
    guarded(|| {
        let field = match expect_field(field) {
            Ok(field) => field,
            Err(status) => return status,
        };
        if out.is_null() {
            return fail(FmStatus::NullArgument, "out pointer is NULL");
        }
        *out = stationarity_residual(field).relative;
        FmStatus::Ok
    })
}

/// Classifies against the ideal equations; the certificate arrives as JSON.
/// `tol <= 0` selects the default tolerance.
///
/// # Safety
/// `field` must be a live handle; `out` must be a valid location for one
/// pointer. The returned string is released with `fm_string_free`.
#[no_mangle]
pub unsafe extern "C" fn fm_field_classify_json(
    field: *const FmField,
    tol: f64,
    out: *mut *mut c_char,
) -> FmStatus {
    guarded(|| {
        let field = match expect_field(field) {
            Ok(field) => field,
            Err(status) => return status,
        };
        let certificate = match classify_euler(field, tol) {
            Ok(certificate) => certificate,
            Err(e) => return fail(FmStatus::ClassifyError, e.to_string()),
        };
        match certificate_to_json(&certificate) {
            Ok(doc) => hand_out_string(out, doc.to_string()),
            Err(e) => fail(FmStatus::ClassifyError, e.to_string()),
        }
    })
}

/// Classifies against the viscous / rotating equations; the certificate
/// arrives as JSON. `tol <= 0` selects the default tolerance.
///
/// # Safety
/// `field` must be a live handle; `out` must be a valid location for one
/// pointer. The returned string is released with `fm_string_free`.
#[no_mangle]
pub unsafe extern "C" fn fm_field_classify_nsc_json(
    field: *const FmField,
    nu: f64,
    omega: f64,
    tol: f64,
    out: *mut *mut c_char,
) -> FmStatus {
    guarded(|| {
        let field = match expect_field(field) {
            Ok(field) => field,
            Err(status) => return status,
        };
        let certificate = match classify_nsc(field, nu, omega, tol) {
            Ok(certificate) => certificate,
            Err(e) => return fail(FmStatus::ClassifyError, e.to_string()),
        };
        match nsc_certificate_to_json(&certificate) {
            Ok(doc) => hand_out_string(out, doc.to_string()),
            Err(e) => fail(FmStatus::ClassifyError, e.to_string()),
        }
    })
}

/// Releases a field handle. NULL is a no-op.
///
/// # Safety
/// `field` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn fm_field_free(field: *mut FmField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Releases a string produced by this library. NULL is a no-op.
///
/// # Safety
/// `text` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn fm_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

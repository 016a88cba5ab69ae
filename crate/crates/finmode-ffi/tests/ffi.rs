//! Exercises the C entry points through their raw signatures: handle and
//! string ownership, status codes, error messages, and the generated header.

use std::ffi::{c_char, CString};
use std::ptr;

use finmode_ffi::*;

fn take_string(raw: *mut c_char) -> String {
    assert!(!raw.is_null());
    let text = unsafe { std::ffi::CStr::from_ptr(raw) }
        .to_str()
        .expect("library strings are UTF-8")
        .to_owned();
    unsafe { fm_string_free(raw) };
    text
}

fn last_error() -> String {
    unsafe { std::ffi::CStr::from_ptr(fm_last_error()) }
        .to_str()
        .unwrap()
        .to_owned()
}

#[test]
fn abc_round_trips_through_json() {
    unsafe {
        let mut field: *mut FmField = ptr::null_mut();
        assert_eq!(fm_field_make_abc(1.0, 2.0, 3.0, &mut field), FmStatus::Ok);

        let mut energy = 0.0f64;
        assert_eq!(fm_field_energy(field, &mut energy), FmStatus::Ok);
        assert!((energy - 7.0).abs() < 1e-12);

        let mut count = 0usize;
        assert_eq!(fm_field_mode_count(field, &mut count), FmStatus::Ok);
        assert_eq!(count, 6);

        assert_eq!(fm_field_validate(field, 0.0), FmStatus::Ok);

        let mut residual = f64::NAN;
        assert_eq!(fm_field_residual(field, &mut residual), FmStatus::Ok);
        assert!(residual < 1e-12);

        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(fm_field_to_json(field, &mut json), FmStatus::Ok);
        let document = take_string(json);

        let text = CString::new(document.clone()).unwrap();
        let mut reparsed: *mut FmField = ptr::null_mut();
        assert_eq!(
            fm_field_parse_json(text.as_ptr(), &mut reparsed),
            FmStatus::Ok
        );
        let mut json_again: *mut c_char = ptr::null_mut();
        assert_eq!(fm_field_to_json(reparsed, &mut json_again), FmStatus::Ok);
        assert_eq!(take_string(json_again), document);

        fm_field_free(field);
        fm_field_free(reparsed);
    }
}

#[test]
fn classification_reports_the_eigenfield() {
    unsafe {
        let mut field: *mut FmField = ptr::null_mut();
        assert_eq!(fm_field_make_abc(1.0, 1.0, 1.0, &mut field), FmStatus::Ok);
        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(fm_field_classify_json(field, 0.0, &mut json), FmStatus::Ok);
        let doc: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(doc["family"], "beltrami");
        assert_eq!(doc["sign"], "plus");
        fm_field_free(field);
    }
}

#[test]
fn viscous_classification_rejects_quadratic_vertical_part() {
    let quadratic = finmode::generate::planar_q(
        &finmode::spectral_field::int_mode(0, 0, 1),
        4,
        &[0.0, 1.0],
    )
    .unwrap();
    let document = finmode::spectral_field::serialize(&quadratic).unwrap();
    unsafe {
        let text = CString::new(document).unwrap();
        let mut field: *mut FmField = ptr::null_mut();
        assert_eq!(fm_field_parse_json(text.as_ptr(), &mut field), FmStatus::Ok);
        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(
            fm_field_classify_nsc_json(field, 0.5, 0.0, 0.0, &mut json),
            FmStatus::Ok
        );
        let doc: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(doc["certificate"]["family"], "non_solution");
        assert_eq!(doc["constraint"], "linear");
        fm_field_free(field);
    }
}

#[test]
fn failures_set_status_and_message() {
    unsafe {
        let mut field: *mut FmField = ptr::null_mut();
        assert_eq!(
            fm_field_make_abc(f64::NAN, 1.0, 1.0, &mut field),
            FmStatus::GenerateError
        );
        assert!(last_error().contains("finite"));

        let bad = CString::new("not a field document").unwrap();
        assert_eq!(
            fm_field_parse_json(bad.as_ptr(), &mut field),
            FmStatus::ParseError
        );
        assert!(!last_error().is_empty());

        assert_eq!(
            fm_field_parse_json(ptr::null(), &mut field),
            FmStatus::NullArgument
        );
        let mut energy = 0.0f64;
        assert_eq!(
            fm_field_energy(ptr::null(), &mut energy),
            FmStatus::NullArgument
        );

        // A structurally broken document parses but fails validation.
        let divergent = CString::new(
            r#"{"real_valued":true,"zero_mode":null,"modes":[
                {"n":[[1,1],[0,1],[0,1]],"re":[1.0,0.0,0.0],"im":[0.0,0.0,0.0]},
                {"n":[[-1,1],[0,1],[0,1]],"re":[1.0,0.0,0.0],"im":[0.0,0.0,0.0]}]}"#,
        )
        .unwrap();
        let mut parsed: *mut FmField = ptr::null_mut();
        assert_eq!(
            fm_field_parse_json(divergent.as_ptr(), &mut parsed),
            FmStatus::Ok
        );
        assert_eq!(fm_field_validate(parsed, 0.0), FmStatus::InvalidField);
        assert!(!last_error().is_empty());
        fm_field_free(parsed);

        // Free of NULL is a no-op.
        fm_field_free(ptr::null_mut());
        fm_string_free(ptr::null_mut());
    }
}

#[test]
fn generated_header_exports_the_surface() {
    let header = std::fs::read_to_string(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/finmode.h"),
    )
    .expect("build script generates the header");
    for needle in [
        "FINMODE_H",
        "typedef struct FmField FmField",
        "FM_STATUS_OK",
        "FM_STATUS_PARSE_ERROR",
        "fm_field_parse_json",
        "fm_field_classify_nsc_json",
        "fm_field_free",
        "fm_string_free",
        "fm_last_error",
    ] {
        assert!(header.contains(needle), "header lacks {needle}");
    }
}

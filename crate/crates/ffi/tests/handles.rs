use std::ffi::{CStr, CString};
use std::ptr;

use toral_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as libc::c_char; 256];
    unsafe { toral_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn shell_roundtrip() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { toral_shell_new(2, 25, &mut s) }, ToralStatus::Ok);
    assert_eq!(unsafe { toral_shell_len(s) }, 12);
    assert_eq!(unsafe { toral_shell_dim(s) }, 2);
    let mut p = [0i64; 2];
    for i in 0..12 {
        assert_eq!(
            unsafe { toral_shell_point(s, i, p.as_mut_ptr()) },
            ToralStatus::Ok
        );
        assert_eq!(p[0] * p[0] + p[1] * p[1], 25);
    }
    assert_eq!(
        unsafe { toral_shell_point(s, 12, p.as_mut_ptr()) },
        ToralStatus::OutOfRange
    );
    unsafe { toral_shell_free(s) };
}

#[test]
fn counts_match_shell() {
    let mut c = 0u64;
    assert_eq!(
        unsafe { toral_sum_of_squares_count(3, 3, &mut c) },
        ToralStatus::Ok
    );
    assert_eq!(c, 8);
    assert_eq!(
        unsafe { toral_sum_of_squares_count(3, -1, &mut c) },
        ToralStatus::InvalidArgument
    );
}

#[test]
fn gram_of_lebesgue_is_identity() {
    let json = CString::new(r#"{"type":"lebesgue","d":2}"#).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { toral_measure_from_json(json.as_ptr(), &mut m) },
        ToralStatus::Ok
    );
    assert_eq!(unsafe { toral_measure_dim(m) }, 2);
    let (mut re, mut im) = (0.0, 0.0);
    let k = [0i64, 0];
    assert_eq!(
        unsafe { toral_measure_fourier_coeff(m, k.as_ptr(), 2, &mut re, &mut im) },
        ToralStatus::Ok
    );
    assert_eq!((re, im), (1.0, 0.0));

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { toral_shell_new(2, 65, &mut s) }, ToralStatus::Ok);
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { toral_gram_new(s, m, 0, &mut g) }, ToralStatus::Ok);
    assert_eq!(unsafe { toral_gram_dim(g) }, 16);
    let (mut lo, mut hi) = (0.0, 0.0);
    assert_eq!(
        unsafe { toral_gram_extremes(g, &mut lo, &mut hi) },
        ToralStatus::Ok
    );
    assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    unsafe {
        toral_gram_free(g);
        toral_shell_free(s);
        toral_measure_free(m);
    }
}

#[test]
fn errors_carry_messages() {
    let bad = CString::new(r#"{"type":"nope"}"#).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { toral_measure_from_json(bad.as_ptr(), &mut m) },
        ToralStatus::Json
    );
    assert!(m.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(
        unsafe { toral_shell_new(2, 5, ptr::null_mut()) },
        ToralStatus::NullPointer
    );
    assert_eq!(last_error(), "out is null");
    unsafe { toral_shell_free(ptr::null_mut()) };
}

#[test]
fn header_declares_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/toral.h")).unwrap();
    for name in [
        "toral_shell_new",
        "toral_gram_extremes",
        "toral_last_error",
        "TORAL_STATUS_OK",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}

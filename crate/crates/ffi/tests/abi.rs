use std::ffi::{c_char, CStr, CString};
use std::ptr;

use tailrisk_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe {
        tr_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn model(spec: &str) -> *mut TrModel {
    let spec = CString::new(spec).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { tr_model_parse(spec.as_ptr(), &mut m) }, TR_OK);
    m
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(tr_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn analytic_measures_through_the_abi() {
    let m = model("normal(0,1)");
    let mut var = 0.0;
    let mut cte = 0.0;
    let mut tcerm = 0.0;
    let mut tqlm = 0.0;
    let u = CString::new("exp:0.5").unwrap();
    unsafe {
        assert_eq!(tr_model_var(m, 0.95, &mut var), TR_OK);
        assert_eq!(tr_model_cte(m, 0.95, &mut cte), TR_OK);
        assert_eq!(tr_model_tcerm(m, 0.95, 0.5, &mut tcerm), TR_OK);
        assert_eq!(tr_model_tqlm(m, 0.95, u.as_ptr(), &mut tqlm), TR_OK);
        tr_model_free(m);
    }
    assert!((var - 1.6448536269514722).abs() < 1e-12);
    assert!((cte - 2.0627128075074251).abs() < 1e-12);
    assert!((tcerm - 2.1006578988012542).abs() < 1e-12);
    assert!((tqlm - tcerm).abs() < 1e-10);
}

#[test]
fn error_codes_and_messages() {
    let m = model("t(5,0,1)");
    let mut out = 0.0;
    assert_eq!(unsafe { tr_model_tcerm(m, 0.95, 1.0, &mut out) }, TR_ERR_MGF_NONEXISTENT);
    assert!(last_error().contains("moment generating function"));
    assert_eq!(unsafe { tr_model_var(m, 1.5, &mut out) }, TR_ERR_PARAMETER);
    assert_eq!(unsafe { tr_model_var(m, 0.5, ptr::null_mut()) }, TR_ERR_NULL_POINTER);
    assert_eq!(unsafe { tr_model_var(ptr::null(), 0.5, &mut out) }, TR_ERR_NULL_POINTER);
    unsafe { tr_model_free(m) };

    let bad = CString::new("normal(0,").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { tr_model_parse(bad.as_ptr(), &mut h) }, TR_ERR_PARSE);
    assert!(h.is_null());
}

#[test]
fn message_truncation_reports_full_length() {
    let mut out = 0.0;
    unsafe { tr_model_var(ptr::null(), 0.5, &mut out) };
    let mut small = [0 as c_char; 5];
    let full = unsafe { tr_last_error_message(small.as_mut_ptr(), small.len()) };
    assert_eq!(full, "null pointer: model".len());
    assert_eq!(unsafe { CStr::from_ptr(small.as_ptr()) }.to_str().unwrap(), "null");
}

#[test]
fn samples_and_standard_errors() {
    let values = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0];
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tr_sample_new(values.as_ptr(), values.len(), &mut s) }, TR_OK);
    assert_eq!(unsafe { tr_sample_len(s) }, 10);
    let (mut v, mut se) = (0.0, 0.0);
    unsafe {
        assert_eq!(tr_sample_var(s, 0.7, &mut v, ptr::null_mut()), TR_OK);
        assert_eq!(v, 5.0);
        assert_eq!(tr_sample_cte(s, 0.7, &mut v, &mut se), TR_OK);
        assert!((v - 25.0 / 4.0).abs() < 1e-15 && se > 0.0);
        let lin = CString::new("linear").unwrap();
        let mut t = 0.0;
        assert_eq!(tr_sample_tqlm(s, 0.7, lin.as_ptr(), &mut t, ptr::null_mut()), TR_OK);
        assert_eq!(t, v);
        tr_sample_free(s);
    }
    let nan = [1.0, f64::NAN];
    assert_eq!(unsafe { tr_sample_new(nan.as_ptr(), 2, &mut s) }, TR_ERR_INPUT);
}

#[test]
fn model_sample_is_seeded() {
    let m = model("logistic(0,1)");
    let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
    let (mut x, mut y) = (0.0, 0.0);
    unsafe {
        assert_eq!(tr_model_sample(m, 1000, 7, &mut a), TR_OK);
        assert_eq!(tr_model_sample(m, 1000, 7, &mut b), TR_OK);
        tr_sample_cte(a, 0.9, &mut x, ptr::null_mut());
        tr_sample_cte(b, 0.9, &mut y, ptr::null_mut());
        tr_sample_free(a);
        tr_sample_free(b);
        tr_model_free(m);
    }
    assert_eq!(x, y);
}

#[test]
fn retention_and_infeasibility() {
    let mut a = 0.0;
    assert_eq!(unsafe { tr_retention_exponential(1.0, 0.2, 0.03, 0.95, &mut a) }, TR_OK);
    assert!((a - 40f64.ln()).abs() < 1e-10);
    assert_eq!(unsafe { tr_retention_exponential(1.0, 0.2, 0.5, 0.95, &mut a) }, TR_ERR_INFEASIBLE);
    assert!(last_error().contains("infeasible"));

    let m = model("normal(10,2)");
    assert_eq!(unsafe { tr_retention_model(m, 0.1, 0.05, 0.9, &mut a) }, TR_OK);
    assert!(a > 10.0 + 2.0 * 1.2815515655446004);
    unsafe { tr_model_free(m) };
}

#[test]
fn portfolio_weights() {
    let mu = [0.0, 0.0];
    let sigma = [1.0, 0.2, 0.2, 1.0];
    let g = CString::new("normal").unwrap();
    let mut w = [0.0; 2];
    let mut r = -1.0;
    let mut agrees = false;
    let rc = unsafe {
        tr_portfolio_min_risk(2, mu.as_ptr(), sigma.as_ptr(), g.as_ptr(), 0.95, 0.3, w.as_mut_ptr(), &mut r, &mut agrees)
    };
    assert_eq!(rc, TR_OK);
    assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
    assert_eq!(r, 0.0);
    assert!(agrees);

    let indefinite = [1.0, 2.0, 2.0, 1.0];
    let rc = unsafe {
        tr_portfolio_min_risk(2, mu.as_ptr(), indefinite.as_ptr(), g.as_ptr(), 0.95, 0.3, w.as_mut_ptr(), &mut r, ptr::null_mut())
    };
    assert_eq!(rc, TR_ERR_INPUT);
}

//! C ABI for the `tailrisk` engine.
//!
//! Every fallible function returns a status code (`TR_OK` on success) and
//! writes results through out-pointers. After a failure,
//! `tr_last_error_message` copies a description of the most recent error on
//! the calling thread. Handles are opaque and released with the matching
//! `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tailrisk::portfolio::{min_risk_weights, EllipticalModel};
use tailrisk::reinsurance::{solve_retention, Loss, ReinsuranceProblem};
use tailrisk::risk;
use tailrisk::{Generator, RiskError, SampleSet, SymmetricModel, UtilityFunction};

pub const TR_OK: i32 = 0;
pub const TR_ERR_NULL_POINTER: i32 = 1;
pub const TR_ERR_DOMAIN: i32 = 2;
pub const TR_ERR_PARAMETER: i32 = 3;
pub const TR_ERR_INPUT: i32 = 4;
pub const TR_ERR_MGF_NONEXISTENT: i32 = 5;
pub const TR_ERR_UNSUPPORTED_GENERATOR: i32 = 6;
pub const TR_ERR_DIFFERENTIABILITY: i32 = 7;
pub const TR_ERR_RANGE: i32 = 8;
pub const TR_ERR_INFEASIBLE: i32 = 9;
pub const TR_ERR_NO_ROOT: i32 = 10;
pub const TR_ERR_CONVERGENCE: i32 = 11;
pub const TR_ERR_PARSE: i32 = 12;
pub const TR_ERR_INTERNAL: i32 = 13;
pub const TR_ERR_PANIC: i32 = 14;
pub const TR_ERR_UTF8: i32 = 15;

/// Symmetric location-scale model.
pub struct TrModel(SymmetricModel);

/// Scenario sample.
pub struct TrSample(SampleSet);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn code(e: &RiskError) -> i32 {
    match e {
        RiskError::Domain(_) => TR_ERR_DOMAIN,
        RiskError::Parameter(_) => TR_ERR_PARAMETER,
        RiskError::Input(_) => TR_ERR_INPUT,
        RiskError::MgfNonexistent(_) => TR_ERR_MGF_NONEXISTENT,
        RiskError::UnsupportedGenerator(_) => TR_ERR_UNSUPPORTED_GENERATOR,
        RiskError::Differentiability(_) => TR_ERR_DIFFERENTIABILITY,
        RiskError::Range(_) => TR_ERR_RANGE,
        RiskError::Infeasible { .. } => TR_ERR_INFEASIBLE,
        RiskError::NoRoot { .. } => TR_ERR_NO_ROOT,
        RiskError::Convergence(_) => TR_ERR_CONVERGENCE,
        RiskError::Parse(_) => TR_ERR_PARSE,
        RiskError::Internal(_) => TR_ERR_INTERNAL,
    }
}

enum Failure {
    Null(&'static str),
    Utf8,
    Risk(RiskError),
}

impl From<RiskError> for Failure {
    fn from(e: RiskError) -> Self {
        Failure::Risk(e)
    }
}

type FfiResult<T> = Result<T, Failure>;

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TR_OK,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            TR_ERR_NULL_POINTER
        }
        Ok(Err(Failure::Utf8)) => {
            set_error("string argument is not valid UTF-8".into());
            TR_ERR_UTF8
        }
        Ok(Err(Failure::Risk(e))) => {
            set_error(e.to_string());
            code(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            TR_ERR_PANIC
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8)
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> FfiResult<&'a T> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> FfiResult<()> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> FfiResult<&'a [f64]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn tr_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Parse a model such as `normal(0,1)`, `t(5,0,1)` or `logistic(0,1)`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tr_model_parse(spec: *const c_char, out: *mut *mut TrModel) -> i32 {
    guard(|| {
        let m: SymmetricModel = str_arg(spec, "spec")?.parse()?;
        write(out, Box::into_raw(Box::new(TrModel(m))), "out")
    })
}

/// # Safety
/// `model` must come from `tr_model_parse` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tr_model_free(model: *mut TrModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// `VaR_alpha`.
///
/// # Safety
/// `model` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tr_model_var(model: *const TrModel, alpha: f64, out: *mut f64) -> i32 {
    guard(|| write(out, risk::var_analytic(&deref(model, "model")?.0, alpha)?, "out"))
}

/// `CTE_alpha`.
///
/// # Safety
/// `model` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tr_model_cte(model: *const TrModel, alpha: f64, out: *mut f64) -> i32 {
    guard(|| write(out, risk::cte_analytic(&deref(model, "model")?.0, alpha)?, "out"))
}

/// Tail variance at level `alpha`.
///
/// # Safety
/// `model` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tr_model_tail_variance(model: *const TrModel, alpha: f64, out: *mut f64) -> i32 {
    guard(|| write(out, risk::tail_variance_analytic(&deref(model, "model")?.0, alpha)?, "out"))
}

/// Tail quasi-linear mean for a utility such as `exp:0.5`, `pow:2`, `log`.
///
/// # Safety
/// `model` must be a live handle, `utility` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tr_model_tqlm(
    model: *const TrModel,
    alpha: f64,
    utility: *const c_char,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let m = &deref(model, "model")?.0;
        let u: UtilityFunction = str_arg(utility, "utility")?.parse()?;
        write(out, risk::tqlm_analytic(m, alpha, &u)?.to_f64(), "out")
    })
}

/// Tail conditional entropic risk measure in closed form.
///
/// # Safety
/// `model` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tr_model_tcerm(model: *const TrModel, alpha: f64, gamma: f64, out: *mut f64) -> i32 {
    guard(|| {
        let m = &deref(model, "model")?.0;
        write(out, risk::tcerm_analytic(m, alpha, gamma)?, "out")
    })
}

/// Seeded sample of `n` draws.
///
/// # Safety
/// `model` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tr_model_sample(model: *const TrModel, n: usize, seed: u64, out: *mut *mut TrSample) -> i32 {
    guard(|| {
        let s = deref(model, "model")?.0.sample(n, seed)?;
        write(out, Box::into_raw(Box::new(TrSample(s))), "out")
    })
}

/// Copy `len` finite values into a new sample.
///
/// # Safety
/// `values` must be valid for `len` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn tr_sample_new(values: *const f64, len: usize, out: *mut *mut TrSample) -> i32 {
    guard(|| {
        let s = SampleSet::new(slice(values, len, "values")?.to_vec())?;
        write(out, Box::into_raw(Box::new(TrSample(s))), "out")
    })
}

/// # Safety
/// `sample` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tr_sample_free(sample: *mut TrSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// Number of scenarios, 0 for a null handle.
///
/// # Safety
/// `sample` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tr_sample_len(sample: *const TrSample) -> usize {
    sample.as_ref().map_or(0, |s| s.0.len())
}

/// Write `NAN` when no standard error is available.
unsafe fn write_se(out_se: *mut f64, se: Option<f64>) {
    if !out_se.is_null() {
        out_se.write(se.unwrap_or(f64::NAN));
    }
}

/// Empirical VaR; `out_se` may be null.
///
/// # Safety
/// `sample` must be a live handle, `out` writable, `out_se` null or writable.
#[no_mangle]
pub unsafe extern "C" fn tr_sample_var(sample: *const TrSample, alpha: f64, out: *mut f64, out_se: *mut f64) -> i32 {
    guard(|| {
        let e = risk::var_estimate(&deref(sample, "sample")?.0, alpha)?;
        write(out, e.value, "out")?;
        write_se(out_se, e.standard_error);
        Ok(())
    })
}

/// Empirical CTE; `out_se` may be null.
///
/// # Safety
/// `sample` must be a live handle, `out` writable, `out_se` null or writable.
#[no_mangle]
pub unsafe extern "C" fn tr_sample_cte(sample: *const TrSample, alpha: f64, out: *mut f64, out_se: *mut f64) -> i32 {
    guard(|| {
        let e = risk::cte_estimate(&deref(sample, "sample")?.0, alpha)?;
        write(out, e.value, "out")?;
        write_se(out_se, e.standard_error);
        Ok(())
    })
}

/// Empirical tail quasi-linear mean; `out_se` may be null.
///
/// # Safety
/// `sample` must be a live handle, `utility` NUL-terminated, `out` writable,
/// `out_se` null or writable.
#[no_mangle]
pub unsafe extern "C" fn tr_sample_tqlm(
    sample: *const TrSample,
    alpha: f64,
    utility: *const c_char,
    out: *mut f64,
    out_se: *mut f64,
) -> i32 {
    guard(|| {
        let s = &deref(sample, "sample")?.0;
        let u: UtilityFunction = str_arg(utility, "utility")?.parse()?;
        let (v, se) = risk::tqlm_estimate(s, alpha, &u)?;
        write(out, v.to_f64(), "out")?;
        write_se(out_se, se);
        Ok(())
    })
}

/// Stop-loss retention for a symmetric loss model.
///
/// # Safety
/// `model` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tr_retention_model(
    model: *const TrModel,
    theta: f64,
    budget: f64,
    alpha: f64,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let loss = Loss::Symmetric(deref(model, "model")?.0);
        write(out, solve_retention(&ReinsuranceProblem::new(loss, theta, budget, alpha)?)?, "out")
    })
}

/// Stop-loss retention for an empirical loss sample.
///
/// # Safety
/// `sample` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tr_retention_sample(
    sample: *const TrSample,
    theta: f64,
    budget: f64,
    alpha: f64,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let loss = Loss::Empirical(deref(sample, "sample")?.0.clone());
        write(out, solve_retention(&ReinsuranceProblem::new(loss, theta, budget, alpha)?)?, "out")
    })
}

/// Stop-loss retention for an exponential loss with the given rate.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn tr_retention_exponential(
    rate: f64,
    theta: f64,
    budget: f64,
    alpha: f64,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let loss = Loss::exponential(rate)?;
        write(out, solve_retention(&ReinsuranceProblem::new(loss, theta, budget, alpha)?)?, "out")
    })
}

/// Minimal-risk portfolio weights for `n` assets with location `mu` and
/// row-major scale matrix `sigma` (`n * n` values). `generator` is
/// `normal`, `logistic` or `t(m)`. Writes `n` weights, the root `r*`, and
/// whether the weights agree with the brute-force minimizer (`out_agrees`
/// may be null).
///
/// # Safety
/// `mu` must be valid for `n` reads, `sigma` for `n * n`, `out_weights`
/// for `n` writes, `out_r` for one write; `out_agrees` null or writable.
#[no_mangle]
pub unsafe extern "C" fn tr_portfolio_min_risk(
    n: usize,
    mu: *const f64,
    sigma: *const f64,
    generator: *const c_char,
    alpha: f64,
    gamma: f64,
    out_weights: *mut f64,
    out_r: *mut f64,
    out_agrees: *mut bool,
) -> i32 {
    guard(|| {
        let mu = slice(mu, n, "mu")?.to_vec();
        let cells = n.checked_mul(n).ok_or(Failure::Risk(RiskError::Input("asset count overflows".into())))?;
        let flat = slice(sigma, cells, "sigma")?;
        let g: Generator = str_arg(generator, "generator")?.parse()?;
        let rows = flat.chunks(n.max(1)).map(<[f64]>::to_vec).collect();
        let model = EllipticalModel::new(mu, rows, g)?;
        let s = min_risk_weights(&model, alpha, gamma)?;
        if out_weights.is_null() {
            return Err(Failure::Null("out_weights"));
        }
        ptr::copy_nonoverlapping(s.weights.as_slice().as_ptr(), out_weights, n);
        write(out_r, s.r_star, "out_r")?;
        if !out_agrees.is_null() {
            out_agrees.write(s.diagnostic.agrees);
        }
        Ok(())
    })
}

//! C ABI for the `ordrank` library.
//!
//! Every fallible function returns an [`OrdrankStatus`]; on failure a
//! message is available from [`ordrank_last_error`] on the same thread.
//! Models are opaque handles created by `ordrank_model_new*` and released
//! with [`ordrank_model_free`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ordrank::large_deviations::compare_rates;
use ordrank::model::{OrdinalModel, PatternSpec, StrengthLink};
use ordrank::pattern_analysis::{minimal_snr_monotone, minimal_snr_unconstrained, snr_of_pattern};
use ordrank::ranking::{kendall_tau, PreferenceVector};
use ordrank::seed::rng_for;
use ordrank::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrdrankStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidPattern = 3,
    Domain = 4,
    Parse = 5,
    Convergence = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Opaque model handle.
pub struct OrdrankModel {
    inner: OrdinalModel,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OrdrankMoments {
    pub mean: f64,
    pub variance: f64,
    /// `INFINITY` for a deterministic outcome.
    pub snr: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OrdrankRates {
    pub ordinal: f64,
    pub binary: f64,
    /// 0 when no L₀ estimate exists.
    pub predicted_l0: u64,
    pub converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> OrdrankStatus {
    match e {
        Error::InvalidPattern(_) => OrdrankStatus::InvalidPattern,
        Error::Domain(_) => OrdrankStatus::Domain,
        Error::Convergence(_) => OrdrankStatus::Convergence,
        Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => OrdrankStatus::Parse,
        _ => OrdrankStatus::InvalidArgument,
    }
}

/// Runs `f`, records its error message and converts panics.
fn guard<F: FnOnce() -> Result<(), (OrdrankStatus, String)>>(f: F) -> OrdrankStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OrdrankStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            OrdrankStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (OrdrankStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (OrdrankStatus, String) {
    (OrdrankStatus::NullPointer, format!("{name} is null"))
}

unsafe fn model_ref<'a>(m: *const OrdrankModel) -> Result<&'a OrdinalModel, (OrdrankStatus, String)> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| null("model"))
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, (OrdrankStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (OrdrankStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, need: usize, name: &str) -> Result<&'a mut [T], (OrdrankStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    if len < need {
        return Err((
            OrdrankStatus::BufferTooSmall,
            format!("{name} holds {len} values, {need} needed"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

fn boxed(model: OrdinalModel, out: *mut *mut OrdrankModel) {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(OrdrankModel { inner: model })) };
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ordrank_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a model from the JSON descriptor
/// `{"link": {"kind": ..., "scale": ...}, "pattern": {"K": ..., "weights"|"psi": [...]}}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ordrank_model_new_from_json(json: *const c_char, out: *mut *mut OrdrankModel) -> OrdrankStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = OrdinalModel::from_json(text(json, "json")?).map_err(lib_err)?;
        boxed(model, out);
        Ok(())
    })
}

/// Builds a model from mini-language specs, e.g. `"identity"` and `"abs:0.1"`.
/// `k = 0` takes K from a `,K=<n>` suffix of the pattern.
///
/// # Safety
/// `link` and `pattern` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ordrank_model_new(
    link: *const c_char,
    pattern: *const c_char,
    k: usize,
    out: *mut *mut OrdrankModel,
) -> OrdrankStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let link: StrengthLink = text(link, "link")?.parse().map_err(lib_err)?;
        let (spec, embedded) = PatternSpec::parse_with_k(text(pattern, "pattern")?).map_err(lib_err)?;
        let k = match (k, embedded) {
            (0, Some(e)) => e,
            (0, None) => {
                return Err((OrdrankStatus::InvalidArgument, "K missing".into()));
            }
            (k, Some(e)) if k != e => {
                return Err((OrdrankStatus::InvalidArgument, format!("K = {k} conflicts with K={e}")));
            }
            (k, _) => k,
        };
        boxed(OrdinalModel::new(link, spec.build(k).map_err(lib_err)?), out);
        Ok(())
    })
}

/// Releases a model; null is ignored.
///
/// # Safety
/// `model` must come from `ordrank_model_new*` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ordrank_model_free(model: *mut OrdrankModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// K of the model, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ordrank_model_k(model: *const OrdrankModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.k())
}

/// Writes the 2K probabilities of outcomes −K..−1, 1..K.
///
/// # Safety
/// `model` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ordrank_model_pmf(
    model: *const OrdrankModel,
    gamma: f64,
    out: *mut f64,
    len: usize,
) -> OrdrankStatus {
    guard(|| {
        let m = model_ref(model)?;
        let table = m.pmf_table(gamma);
        let dst = out_slice(out, len, table.len(), "out")?;
        for (d, (_, p)) in dst.iter_mut().zip(table) {
            *d = p;
        }
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ordrank_model_prob_positive(model: *const OrdrankModel, gamma: f64, out: *mut f64) -> OrdrankStatus {
    guard(|| {
        let m = model_ref(model)?;
        let dst = out.as_mut().ok_or_else(|| null("out"))?;
        *dst = m.prob_positive(gamma);
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ordrank_model_moments(
    model: *const OrdrankModel,
    gamma: f64,
    out: *mut OrdrankMoments,
) -> OrdrankStatus {
    guard(|| {
        let m = model_ref(model)?;
        let dst = out.as_mut().ok_or_else(|| null("out"))?;
        let mo = m.moments(gamma);
        *dst = OrdrankMoments {
            mean: mo.mean,
            variance: mo.variance,
            snr: mo.snr,
        };
        Ok(())
    })
}

/// Draws `count` outcomes; the same seed always yields the same draws.
///
/// # Safety
/// `model` must be a live handle; `out` must hold `count` ints.
#[no_mangle]
pub unsafe extern "C" fn ordrank_model_sample(
    model: *const OrdrankModel,
    gamma: f64,
    seed: u64,
    out: *mut i32,
    count: usize,
) -> OrdrankStatus {
    guard(|| {
        let m = model_ref(model)?;
        let dst = out_slice(out, count, count, "out")?;
        let mut rng = rng_for(seed, &[]);
        let sampler = m.sampler(gamma);
        for d in dst.iter_mut() {
            *d = sampler.draw(&mut rng);
        }
        Ok(())
    })
}

/// SNR of the model's magnitude distribution (`INFINITY` if degenerate).
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ordrank_model_snr(model: *const OrdrankModel, out: *mut f64) -> OrdrankStatus {
    guard(|| {
        let m = model_ref(model)?;
        let dst = out.as_mut().ok_or_else(|| null("out"))?;
        *dst = snr_of_pattern(m.pattern()).snr;
        Ok(())
    })
}

/// Minimal SNR over patterns on {1..K} (non-increasing ones if `monotone`).
/// `weights` may be null; otherwise it receives the K optimal weights.
///
/// # Safety
/// `value` must be writable; `weights`, if non-null, must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ordrank_minimal_snr(
    k: usize,
    monotone: bool,
    value: *mut f64,
    weights: *mut f64,
    len: usize,
) -> OrdrankStatus {
    guard(|| {
        let v = value.as_mut().ok_or_else(|| null("value"))?;
        let m = if monotone {
            minimal_snr_monotone(k)
        } else {
            minimal_snr_unconstrained(k)
        }
        .map_err(lib_err)?;
        if !weights.is_null() {
            let dst = out_slice(weights, len, k, "weights")?;
            dst.copy_from_slice(m.pattern.weights());
        }
        *v = m.value;
        Ok(())
    })
}

/// Rate functions at zero for ordinal and binarized two-item data, plus the
/// heuristic L₀ at the given error-ratio `factor`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ordrank_model_rates(
    model: *const OrdrankModel,
    gamma: f64,
    factor: f64,
    out: *mut OrdrankRates,
) -> OrdrankStatus {
    guard(|| {
        let m = model_ref(model)?;
        let dst = out.as_mut().ok_or_else(|| null("out"))?;
        if !(factor > 1.0) {
            return Err((OrdrankStatus::InvalidArgument, "factor must exceed 1".into()));
        }
        let r = compare_rates(m, gamma, factor);
        *dst = OrdrankRates {
            ordinal: r.ordinal.rate,
            binary: r.binary.rate,
            predicted_l0: r.predicted_l0.unwrap_or(0),
            converged: r.ordinal.converged && r.binary.converged,
        };
        if !dst.converged {
            return Err((OrdrankStatus::Convergence, format!("rate minimization at γ = {gamma}")));
        }
        Ok(())
    })
}

/// Fraction of item pairs ordered differently by `scores` and `theta`
/// (score ties count as errors).
///
/// # Safety
/// `scores` and `theta` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ordrank_kendall_tau(
    scores: *const f64,
    theta: *const f64,
    n: usize,
    out: *mut f64,
) -> OrdrankStatus {
    guard(|| {
        if scores.is_null() || theta.is_null() {
            return Err(null("scores/theta"));
        }
        let dst = out.as_mut().ok_or_else(|| null("out"))?;
        let s = std::slice::from_raw_parts(scores, n);
        let t = PreferenceVector::new(std::slice::from_raw_parts(theta, n).to_vec()).map_err(lib_err)?;
        *dst = kendall_tau(s, &t).map_err(lib_err)?;
        Ok(())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ordrank_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

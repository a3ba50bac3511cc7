//! C ABI over `rqmc-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` or
//! `*_generate` functions and released by the matching `*_free`. Every call
//! returns an [`RqmcStatus`]; on failure, [`rqmc_last_error_message`] gives
//! a description that stays valid until the next failing call on the same
//! thread. Results are written through out-pointers.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rqmc_core::digital_nets::{generate_net, verify_net, NetSpec, PointSet};
use rqmc_core::experiment::{
    parse_key_values, run_study, theoretical_exponent, StudyConfig, Verdict,
};
use rqmc_core::finance::{self, FactorKind, GbmModel, PathFactor, PayoffKind, PayoffSpec};
use rqmc_core::scrambling::{scramble, ScrambleSeed, SCRAMBLE_DEPTH};
use rqmc_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RqmcStatus {
    Ok = 0,
    NullPointer = 1,
    Capacity = 2,
    Contract = 3,
    Domain = 4,
    NotPositiveDefinite = 5,
    Tolerance = 6,
    WorkBudget = 7,
    Infeasible = 8,
    InsufficientData = 9,
    NonFinite = 10,
    OracleUnavailable = 11,
    Parse = 12,
    Io = 13,
    InvalidUtf8 = 14,
    Panic = 15,
}

impl From<&Error> for RqmcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Capacity { .. } => Self::Capacity,
            Error::Contract(_) => Self::Contract,
            Error::Domain(_) => Self::Domain,
            Error::NotPositiveDefinite { .. } => Self::NotPositiveDefinite,
            Error::Tolerance { .. } => Self::Tolerance,
            Error::WorkBudget { .. } => Self::WorkBudget,
            Error::Infeasible(_) => Self::Infeasible,
            Error::InsufficientData { .. } => Self::InsufficientData,
            Error::NonFinite { .. } => Self::NonFinite,
            Error::OracleUnavailable(_) => Self::OracleUnavailable,
            Error::Parse { .. } => Self::Parse,
            Error::Io(_) => Self::Io,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RqmcPayoff {
    AsianCall = 0,
    AsianDelta = 1,
    AsianGamma = 2,
    AsianRho = 3,
    AsianTheta = 4,
    AsianVega = 5,
    GeometricIndicator = 6,
}

impl From<RqmcPayoff> for PayoffKind {
    fn from(p: RqmcPayoff) -> Self {
        match p {
            RqmcPayoff::AsianCall => PayoffKind::AsianCall,
            RqmcPayoff::AsianDelta => PayoffKind::AsianDelta,
            RqmcPayoff::AsianGamma => PayoffKind::AsianGamma,
            RqmcPayoff::AsianRho => PayoffKind::AsianRho,
            RqmcPayoff::AsianTheta => PayoffKind::AsianTheta,
            RqmcPayoff::AsianVega => PayoffKind::AsianVega,
            RqmcPayoff::GeometricIndicator => PayoffKind::GeometricIndicatorPayoff,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RqmcFactor {
    Cholesky = 0,
    Ot = 1,
}

impl From<RqmcFactor> for FactorKind {
    fn from(f: RqmcFactor) -> Self {
        match f {
            RqmcFactor::Cholesky => FactorKind::Cholesky,
            RqmcFactor::Ot => FactorKind::Ot,
        }
    }
}

/// Opaque point set.
pub struct RqmcPointSet(PointSet);

/// Opaque market model.
pub struct RqmcModel(GbmModel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Failure {
    Core(Error),
    Status(RqmcStatus, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(RqmcStatus::NullPointer, format!("{what} is null"))
}

/// Run `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> RqmcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => RqmcStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            let status = RqmcStatus::from(&e);
            set_error(e.to_string());
            status
        }
        Ok(Err(Failure::Status(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RqmcStatus::Panic
        }
    }
}

/// # Safety
/// `out` must be null or valid for a write.
unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failure on this thread; empty if none. Owned by the
/// library.
#[no_mangle]
pub extern "C" fn rqmc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// First `2^m` points of the `d`-dimensional Sobol' sequence.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rqmc_points_generate(
    m: u32,
    d: usize,
    out: *mut *mut RqmcPointSet,
) -> RqmcStatus {
    guard(|| {
        let pts = generate_net(&NetSpec::sobol(m, d)?)?;
        write(out, Box::into_raw(Box::new(RqmcPointSet(pts))), "out")
    })
}

/// Owen-scrambled copy of `points`.
///
/// # Safety
/// `points` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rqmc_points_scramble(
    points: *const RqmcPointSet,
    master_seed: u64,
    replicate_index: u64,
    out: *mut *mut RqmcPointSet,
) -> RqmcStatus {
    guard(|| {
        let pts = points.as_ref().ok_or_else(|| null("points"))?;
        let s = scramble(
            &pts.0,
            ScrambleSeed::new(master_seed, replicate_index),
            SCRAMBLE_DEPTH,
        )?;
        write(out, Box::into_raw(Box::new(RqmcPointSet(s))), "out")
    })
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `points` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rqmc_points_len(points: *const RqmcPointSet) -> usize {
    points.as_ref().map_or(0, |p| p.0.len())
}

/// Dimension, or 0 for a null handle.
///
/// # Safety
/// `points` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rqmc_points_dim(points: *const RqmcPointSet) -> usize {
    points.as_ref().map_or(0, |p| p.0.dim())
}

/// Copy the row-major coordinates into `buf`, which holds `buf_len`
/// doubles and must have room for `len * dim`.
///
/// # Safety
/// `points` must be a live handle; `buf` must be valid for `buf_len` writes.
#[no_mangle]
pub unsafe extern "C" fn rqmc_points_copy(
    points: *const RqmcPointSet,
    buf: *mut f64,
    buf_len: usize,
) -> RqmcStatus {
    guard(|| {
        let pts = points.as_ref().ok_or_else(|| null("points"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let coords = pts.0.coords();
        if buf_len < coords.len() {
            return Err(Error::Capacity {
                what: "coordinates",
                requested: coords.len(),
                available: buf_len,
            }
            .into());
        }
        ptr::copy_nonoverlapping(coords.as_ptr(), buf, coords.len());
        Ok(())
    })
}

/// # Safety
/// `points` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rqmc_points_free(points: *mut RqmcPointSet) {
    if !points.is_null() {
        drop(Box::from_raw(points));
    }
}

/// Exhaustive (t,m,d)-net check in base `base`.
///
/// # Safety
/// `points` must be a live handle; `passed` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rqmc_verify_net(
    points: *const RqmcPointSet,
    base: u32,
    t: u32,
    m: u32,
    d: usize,
    passed: *mut bool,
) -> RqmcStatus {
    guard(|| {
        let pts = points.as_ref().ok_or_else(|| null("points"))?;
        let verdict = verify_net(&pts.0, base, t, m, d)?;
        write(passed, verdict.passed(), "passed")
    })
}

/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rqmc_inv_norm_cdf(p: f64, out: *mut f64) -> RqmcStatus {
    guard(|| write(out, finance::inv_norm_cdf(p)?, "out"))
}

/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rqmc_theoretical_exponent(
    d: usize,
    d_u: usize,
    max_a: f64,
    out: *mut f64,
) -> RqmcStatus {
    guard(|| write(out, theoretical_exponent(d, d_u, max_a)?, "out"))
}

/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rqmc_model_new(
    s0: f64,
    r: f64,
    sigma: f64,
    maturity: f64,
    steps: usize,
    strike: f64,
    out: *mut *mut RqmcModel,
) -> RqmcStatus {
    guard(|| {
        let m = GbmModel::new(s0, r, sigma, maturity, steps, strike)?;
        write(out, Box::into_raw(Box::new(RqmcModel(m))), "out")
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rqmc_model_free(model: *mut RqmcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Closed-form geometric-average Asian call price.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rqmc_geometric_asian_price(
    model: *const RqmcModel,
    out: *mut f64,
) -> RqmcStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        write(out, finance::geometric_asian_price(&m.0), "out")
    })
}

/// RQMC estimate of a payoff over `replicates` scramblings of `2^m`
/// points.
///
/// # Safety
/// `model` must be a live handle; `estimate` and `std_error` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn rqmc_price(
    model: *const RqmcModel,
    payoff: RqmcPayoff,
    factor: RqmcFactor,
    m: u32,
    replicates: usize,
    seed: u64,
    estimate: *mut f64,
    std_error: *mut f64,
) -> RqmcStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if estimate.is_null() || std_error.is_null() {
            return Err(null("output pointer"));
        }
        let spec = PayoffSpec::new(payoff.into(), model.0)?;
        let f = PathFactor::for_model(&model.0, factor.into())?;
        let est = finance::price(&spec, &f, m, replicates, seed)?;
        estimate.write(est.estimate);
        std_error.write(est.std_error);
        Ok(())
    })
}

/// Run a rate study from key-value config text. On success `*report_json`
/// receives a string to release with [`rqmc_string_free`] and `*consistent`
/// the verdict. `workers = 0` uses all cores.
///
/// # Safety
/// `config` must be a NUL-terminated string; the out-pointers must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn rqmc_run_study(
    config: *const c_char,
    workers: usize,
    report_json: *mut *mut c_char,
    consistent: *mut bool,
) -> RqmcStatus {
    guard(|| {
        if config.is_null() {
            return Err(null("config"));
        }
        if report_json.is_null() || consistent.is_null() {
            return Err(null("output pointer"));
        }
        let text = CStr::from_ptr(config)
            .to_str()
            .map_err(|e| Failure::Status(RqmcStatus::InvalidUtf8, e.to_string()))?;
        let mut cfg = StudyConfig::from_key_values(&parse_key_values(text)?)?;
        cfg.plan.workers = workers;
        let report = run_study(&cfg)?;
        let json = CString::new(report.to_json()).expect("JSON has no NUL");
        report_json.write(json.into_raw());
        consistent.write(report.verdict == Verdict::Consistent);
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rqmc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

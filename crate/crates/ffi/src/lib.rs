//! C ABI over the irs-swipt library.
//!
//! Every function returns an [`IrsStatus`]; on failure a message is kept per
//! thread and can be read with [`irs_last_error_message`]. Objects are opaque
//! and owned by the caller, who releases them with the matching `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use irs_swipt::channel::{sample_channels, ChannelSet};
use irs_swipt::config::ScenarioConfig;
use irs_swipt::experiments::{self, trial_seed, ExperimentConfig};
use irs_swipt::scheme::SchemeOutcome;
use irs_swipt::{Error, Scheme};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Solver = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrsScheme {
    Hybrid = 0,
    Ps = 1,
    Ts = 2,
    Tdma = 3,
    TdmaD = 4,
}

fn scheme_from(id: u32) -> Option<Scheme> {
    Some(match id {
        x if x == IrsScheme::Hybrid as u32 => Scheme::Hybrid,
        x if x == IrsScheme::Ps as u32 => Scheme::Ps,
        x if x == IrsScheme::Ts as u32 => Scheme::Ts,
        x if x == IrsScheme::Tdma as u32 => Scheme::Tdma,
        x if x == IrsScheme::TdmaD as u32 => Scheme::TdmaD,
        _ => return None,
    })
}

/// Sweep configuration.
pub struct IrsConfig {
    inner: ExperimentConfig,
}

/// One channel realization together with the scenario it was drawn for.
pub struct IrsInstance {
    scenario: ScenarioConfig,
    channels: ChannelSet,
    seed: u64,
}

/// Result of solving one scheme on one instance.
pub struct IrsOutcome {
    inner: SchemeOutcome,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> IrsStatus {
    match err {
        Error::Config(_) => IrsStatus::Config,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Image(_) => IrsStatus::Io,
        Error::Solver(_) | Error::CorruptedIterate(_) | Error::Infeasible => IrsStatus::Solver,
        _ => IrsStatus::InvalidArgument,
    }
}

struct Fail(IrsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(IrsStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> IrsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IrsStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            IrsStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Fail(IrsStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn in_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn irs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn irs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default sweep configuration.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn irs_config_default(out: *mut *mut IrsConfig) -> IrsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(IrsConfig { inner: ExperimentConfig::default() }));
        Ok(())
    })
}

/// Parses a TOML configuration; missing fields take their defaults.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn irs_config_from_toml(toml: *const c_char, out: *mut *mut IrsConfig) -> IrsStatus {
    guard(|| {
        let text = str_arg(toml, "toml")?;
        let out = out_arg(out, "out")?;
        let inner = ExperimentConfig::from_toml(text)?;
        *out = Box::into_raw(Box::new(IrsConfig { inner }));
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn irs_config_free(config: *mut IrsConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Number of sweep points.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn irs_config_point_count(config: *const IrsConfig, out: *mut usize) -> IrsStatus {
    guard(|| {
        let cfg = in_arg(config, "config")?;
        *out_arg(out, "out")? = cfg.inner.points().len();
        Ok(())
    })
}

/// Draws the channels of one (point, trial) pair exactly as a sweep would.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn irs_instance_sample(
    config: *const IrsConfig,
    point: usize,
    trial: usize,
    out: *mut *mut IrsInstance,
) -> IrsStatus {
    guard(|| {
        let cfg = &in_arg(config, "config")?.inner;
        let out = out_arg(out, "out")?;
        let points = cfg.points();
        let p = points.get(point).ok_or_else(|| {
            Fail(IrsStatus::InvalidArgument, format!("point {point} out of range ({})", points.len()))
        })?;
        let scenario = cfg.scenario(p)?;
        let seed = trial_seed(cfg.seed, p.point_id, trial);
        let channels = sample_channels(seed, &scenario.geometry, &scenario.fading, scenario.m)?;
        *out = Box::into_raw(Box::new(IrsInstance { scenario, channels, seed }));
        Ok(())
    })
}

/// # Safety
/// `instance` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn irs_instance_free(instance: *mut IrsInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Solves one scheme, given as an `IrsScheme` value. An infeasible instance
/// is not an error: the outcome reports `feasible == false`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn irs_solve(instance: *const IrsInstance, scheme: u32, out: *mut *mut IrsOutcome) -> IrsStatus {
    guard(|| {
        irs_swipt::limit_blas_threads();
        let inst = in_arg(instance, "instance")?;
        let scheme =
            scheme_from(scheme).ok_or_else(|| Fail(IrsStatus::InvalidArgument, format!("unknown scheme {scheme}")))?;
        let out = out_arg(out, "out")?;
        let noise = inst.scenario.noise();
        let mut outcomes = experiments::solve_schemes(&inst.channels, &noise, &inst.scenario.ao, &[scheme], inst.seed);
        let inner = outcomes.pop().ok_or_else(|| Fail(IrsStatus::Solver, "no outcome".into()))?;
        *out = Box::into_raw(Box::new(IrsOutcome { inner }));
        Ok(())
    })
}

/// # Safety
/// `outcome` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn irs_outcome_free(outcome: *mut IrsOutcome) {
    if !outcome.is_null() {
        drop(Box::from_raw(outcome));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn irs_outcome_feasible(outcome: *const IrsOutcome, out: *mut bool) -> IrsStatus {
    guard(|| {
        *out_arg(out, "out")? = in_arg(outcome, "outcome")?.inner.feasible();
        Ok(())
    })
}

/// Sum rate in bit/s/Hz, zero when infeasible.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn irs_outcome_sum_rate(outcome: *const IrsOutcome, out: *mut f64) -> IrsStatus {
    guard(|| {
        *out_arg(out, "out")? = in_arg(outcome, "outcome")?.inner.penalized_rate();
        Ok(())
    })
}

/// Outer iterations performed.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn irs_outcome_iterations(outcome: *const IrsOutcome, out: *mut usize) -> IrsStatus {
    guard(|| {
        *out_arg(out, "out")? = in_arg(outcome, "outcome")?.inner.iterations;
        Ok(())
    })
}

/// Copies the time fractions into `buf`. `len_out` always receives the
/// number of slots (zero when infeasible); at most `cap` values are written.
///
/// # Safety
/// `buf` must hold `cap` doubles (may be NULL when `cap` is 0).
#[no_mangle]
pub unsafe extern "C" fn irs_outcome_tau(
    outcome: *const IrsOutcome,
    buf: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> IrsStatus {
    guard(|| {
        let o = in_arg(outcome, "outcome")?;
        let len_out = out_arg(len_out, "len_out")?;
        let tau = o.inner.solution.as_ref().map_or(&[][..], |s| &s.tau[..]);
        *len_out = tau.len();
        let n = tau.len().min(cap);
        if n > 0 {
            if buf.is_null() {
                return Err(null("buf"));
            }
            std::slice::from_raw_parts_mut(buf, n).copy_from_slice(&tau[..n]);
        }
        Ok(())
    })
}

/// Runs the full sweep, writing the result files into `out_dir`.
///
/// # Safety
/// `config` must be valid and `out_dir` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn irs_run_experiment(config: *const IrsConfig, out_dir: *const c_char) -> IrsStatus {
    guard(|| {
        let mut cfg = in_arg(config, "config")?.inner.clone();
        cfg.out_dir = PathBuf::from(str_arg(out_dir, "out_dir")?);
        experiments::run_experiment(&cfg)?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_arguments_are_reported() {
        unsafe {
            assert_eq!(irs_config_default(ptr::null_mut()), IrsStatus::NullPointer);
            let msg = CStr::from_ptr(irs_last_error_message()).to_str().unwrap();
            assert!(msg.contains("out"));
            let mut cfg = ptr::null_mut();
            assert_eq!(irs_config_default(&mut cfg), IrsStatus::Ok);
            assert!(irs_last_error_message().is_null());
            irs_config_free(cfg);
            irs_config_free(ptr::null_mut());
        }
    }

    #[test]
    fn bad_toml_is_a_config_error() {
        let text = CString::new("k = \"two\"").unwrap();
        let mut cfg = ptr::null_mut();
        unsafe {
            assert_eq!(irs_config_from_toml(text.as_ptr(), &mut cfg), IrsStatus::Config);
        }
        assert!(cfg.is_null());
    }
}

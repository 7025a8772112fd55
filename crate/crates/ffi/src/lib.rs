//! C ABI over `breather-core`.
//!
//! Objects are opaque handles created by `*_new` and released by `*_free`.
//! Every fallible call returns a [`KgbStatus`]; the message of the last error
//! on the calling thread is available from [`kgb_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use breather_core::breather::{self, Breather, BreatherConfig, BreatherParams, IntegrationOptions};
use breather_core::continuum::{self, GroundStateProfile};
use breather_core::error::exit_code;
use breather_core::Error;

/// Result codes. Values 2 to 4 match the command line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KgbStatus {
    Ok = 0,
    /// Null pointer, bad string or undersized buffer.
    InvalidArgument = 1,
    /// Parameter out of range or a solver guard tripped.
    Guard = 2,
    NoConvergence = 3,
    Io = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

/// Continuum ground state.
pub struct KgbProfile(GroundStateProfile);

/// Assembled breather.
pub struct KgbBreather(Breather);

/// Numerical settings for [`kgb_breather_new`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct KgbConfig {
    pub l_max: u32,
    /// Truncation radius; 0 derives it from `decay_budget`.
    pub k: u32,
    pub decay_budget: f64,
    pub kernel_tol: f64,
    /// Nonzero to run the Hessian diagnostics.
    pub hessian: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> KgbStatus {
    match e.exit_code() {
        exit_code::GUARD => KgbStatus::Guard,
        exit_code::NONCONVERGENCE => KgbStatus::NoConvergence,
        _ => KgbStatus::Io,
    }
}

/// Runs `f`, mapping errors and panics to a status.
fn guarded(f: impl FnOnce() -> Result<(), KgbStatusError>) -> KgbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KgbStatus::Ok,
        Ok(Err(KgbStatusError::Core(e))) => {
            let s = status_of(&e);
            set_error(e.to_string());
            s
        }
        Ok(Err(KgbStatusError::Argument(msg))) => {
            set_error(msg);
            KgbStatus::InvalidArgument
        }
        Err(_) => {
            set_error("internal panic".into());
            KgbStatus::Panic
        }
    }
}

enum KgbStatusError {
    Core(Error),
    Argument(String),
}

impl From<Error> for KgbStatusError {
    fn from(e: Error) -> Self {
        KgbStatusError::Core(e)
    }
}

fn arg(msg: &str) -> KgbStatusError {
    KgbStatusError::Argument(msg.to_string())
}

unsafe fn str_arg<'a>(s: *const c_char, name: &str) -> Result<&'a str, KgbStatusError> {
    if s.is_null() {
        return Err(arg(&format!("{name} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| arg(&format!("{name} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, KgbStatusError> {
    p.as_mut().ok_or_else(|| arg(&format!("{name} is null")))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, KgbStatusError> {
    p.as_ref().ok_or_else(|| arg("handle is null"))
}

unsafe fn fill(buf: *mut f64, len: usize, values: &[f64]) -> Result<(), KgbStatusError> {
    if buf.is_null() {
        return Err(arg("buffer is null"));
    }
    if len < values.len() {
        return Err(arg(&format!("buffer holds {len} values; {} needed", values.len())));
    }
    std::slice::from_raw_parts_mut(buf, values.len()).copy_from_slice(values);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kgb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length, 0 if there is none.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn kgb_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

#[no_mangle]
pub extern "C" fn kgb_config_default() -> KgbConfig {
    let d = BreatherConfig::default();
    KgbConfig {
        l_max: d.l_max as u32,
        k: 0,
        decay_budget: d.decay_budget,
        kernel_tol: d.kernel_tol,
        hessian: d.hessian as i32,
    }
}

/// Solves for the continuum ground state in dimension `n` with exponent `p`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kgb_profile_new(n: u32, p: f64, tol: f64, out: *mut *mut KgbProfile) -> KgbStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        let gs = continuum::solve_ground_state(n as usize, p, tol)?;
        *out = Box::into_raw(Box::new(KgbProfile(gs)));
        Ok(())
    })
}

/// Frequency parameter `m` of the profile; NaN for a null handle.
///
/// # Safety
/// `h` must be null or a live profile handle.
#[no_mangle]
pub unsafe extern "C" fn kgb_profile_m(h: *const KgbProfile) -> f64 {
    h.as_ref().map_or(f64::NAN, |p| p.0.m())
}

/// Profile value at radius `r`; NaN for a null handle.
///
/// # Safety
/// `h` must be null or a live profile handle.
#[no_mangle]
pub unsafe extern "C" fn kgb_profile_eval(h: *const KgbProfile, r: f64) -> f64 {
    h.as_ref().map_or(f64::NAN, |p| p.0.eval(r))
}

/// # Safety
/// `h` must be null or a handle from [`kgb_profile_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kgb_profile_free(h: *mut KgbProfile) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Assembles a breather. `mode` is `st`, `p`, `h1` or `h2`; `config` may be null
/// for the defaults.
///
/// # Safety
/// `mode` must be a NUL-terminated string, `config` null or valid, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kgb_breather_new(
    n: u32,
    p: f64,
    a: f64,
    mu: f64,
    mode: *const c_char,
    config: *const KgbConfig,
    out: *mut *mut KgbBreather,
) -> KgbStatus {
    guarded(|| {
        let out = out_arg(out, "out")?;
        let mode = str_arg(mode, "mode")?;
        let mut cfg = BreatherConfig::default();
        if let Some(c) = config.as_ref() {
            cfg.l_max = c.l_max as usize;
            cfg.k = (c.k > 0).then_some(c.k as usize);
            cfg.decay_budget = c.decay_budget;
            cfg.kernel_tol = c.kernel_tol;
            cfg.hessian = c.hessian != 0;
        }
        let params = BreatherParams {
            n: n as usize,
            p,
            a,
            mu,
            mode: mode.to_string(),
        };
        let b = breather::assemble(&params, &cfg)?;
        *out = Box::into_raw(Box::new(KgbBreather(b)));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from [`kgb_breather_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kgb_breather_free(h: *mut KgbBreather) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Breather frequency `ω`; NaN for a null handle.
///
/// # Safety
/// `h` must be null or a live breather handle.
#[no_mangle]
pub unsafe extern "C" fn kgb_breather_omega(h: *const KgbBreather) -> f64 {
    h.as_ref().map_or(f64::NAN, |b| b.0.omega)
}

/// Number of sites of the full square lattice `[-K, K]ⁿ` (or its bond-shifted
/// variant); the length of buffers passed to [`kgb_breather_displacement`].
///
/// # Safety
/// `h` must be null or a live breather handle.
#[no_mangle]
pub unsafe extern "C" fn kgb_breather_sites(h: *const KgbBreather) -> usize {
    h.as_ref().map_or(0, |b| b.0.u.lattice().full_len())
}

/// Pointwise and discrete KG residuals.
///
/// # Safety
/// `h` live handle; output pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kgb_breather_residual(h: *const KgbBreather, pointwise: *mut f64, discrete: *mut f64) -> KgbStatus {
    guarded(|| {
        let r = &handle(h)?.0.report.residual;
        *out_arg(pointwise, "pointwise")? = r.pointwise;
        *out_arg(discrete, "discrete")? = r.discrete;
        Ok(())
    })
}

/// Distance to the reference solution in the H² time norm and the sup norm.
///
/// # Safety
/// `h` live handle; output pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kgb_breather_errors(h: *const KgbBreather, e_h2: *mut f64, e_sup: *mut f64) -> KgbStatus {
    guarded(|| {
        let r = &handle(h)?.0.report.reference;
        *out_arg(e_h2, "e_h2")? = r.e_h2;
        *out_arg(e_sup, "e_sup")? = r.e_sup;
        Ok(())
    })
}

/// Displacement `q(s)` at physical time `s` on the full lattice, row-major.
///
/// # Safety
/// `h` live handle; `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn kgb_breather_displacement(h: *const KgbBreather, s: f64, buf: *mut f64, len: usize) -> KgbStatus {
    guarded(|| {
        let b = &handle(h)?.0;
        fill(buf, len, &b.u.at_time(b.omega * s).to_full())
    })
}

/// Leapfrog over whole periods from `(q(0), 0)`.
///
/// # Safety
/// `h` live handle; output pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kgb_breather_integrate(
    h: *const KgbBreather,
    steps_per_period: u32,
    periods: u32,
    return_error: *mut f64,
    energy_drift: *mut f64,
) -> KgbStatus {
    guarded(|| {
        let b = &handle(h)?.0;
        let rep = b.integrate(&IntegrationOptions {
            steps_per_period: steps_per_period as usize,
            periods: periods as usize,
            ..IntegrationOptions::default()
        })?;
        *out_arg(return_error, "return_error")? = rep.return_error;
        *out_arg(energy_drift, "energy_drift")? = rep.energy_drift;
        Ok(())
    })
}

/// Writes `<dir>/<stem>.json` and the binary field next to it.
///
/// # Safety
/// `h` live handle; `dir` and `stem` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn kgb_breather_write(h: *const KgbBreather, dir: *const c_char, stem: *const c_char) -> KgbStatus {
    guarded(|| {
        let b = &handle(h)?.0;
        let dir = str_arg(dir, "dir")?;
        let stem = str_arg(stem, "stem")?;
        b.write(Path::new(dir), stem)?;
        Ok(())
    })
}

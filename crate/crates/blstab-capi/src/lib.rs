//! C ABI for the shear-flow stability toolkit.
//!
//! Conventions: opaque handles created by `_new` functions and released by
//! the matching `_free`; every fallible call returns a `blstab_status`;
//! outputs go through pointers that must be non-null. The last error message
//! is kept per thread and read back with `blstab_last_error`.

#![allow(non_camel_case_types)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use blstab::error::Error;
use blstab::grid::{Backend, GridRef, Mapping, SemiInfiniteGrid};
use blstab::profiles::{validate_profile, ProfileRef, ShearProfile};
use blstab::stability::{max_growth, os_leading, rayleigh_spectrum, OsOptions};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum blstab_status {
    /// Success.
    BLSTAB_OK = 0,
    /// A null handle or output pointer was passed.
    BLSTAB_NULL_POINTER = 1,
    /// Invalid argument or configuration.
    BLSTAB_INVALID_ARGUMENT = 2,
    /// The computation failed numerically.
    BLSTAB_NUMERICAL_ERROR = 3,
    /// A panic was caught at the ABI boundary.
    BLSTAB_INTERNAL_ERROR = 4,
}

use blstab_status::*;

/// Opaque background shear profile.
pub struct blstab_profile(ProfileRef);

/// Opaque half-line grid.
pub struct blstab_grid(GridRef);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> blstab_status {
    match err {
        Error::Config(_) | Error::Usage(_) | Error::Domain(_) => BLSTAB_INVALID_ARGUMENT,
        _ => BLSTAB_NUMERICAL_ERROR,
    }
}

fn guarded(f: impl FnOnce() -> blstab_status) -> blstab_status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            BLSTAB_INTERNAL_ERROR
        }
    }
}

/// Copy the last error message of this thread into `buf` (NUL terminated,
/// truncated to `len`). Returns the untruncated length.
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be null (query mode).
#[no_mangle]
pub unsafe extern "C" fn blstab_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Crate version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn blstab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

fn box_profile(p: ProfileRef) -> *mut blstab_profile {
    Box::into_raw(Box::new(blstab_profile(p)))
}

/// Exponentially decaying shear profile `U = 1 - exp(-z)`.
#[no_mangle]
pub extern "C" fn blstab_profile_exponential() -> *mut blstab_profile {
    box_profile(ShearProfile::exponential())
}

/// Error-function shear profile.
#[no_mangle]
pub extern "C" fn blstab_profile_erf() -> *mut blstab_profile {
    box_profile(ShearProfile::erf_profile())
}

/// Inflected control profile `U = (1 + tanh(b (z - z0))) / 2` blended to the wall.
#[no_mangle]
pub extern "C" fn blstab_profile_tanh(b: f64, z0: f64) -> *mut blstab_profile {
    box_profile(ShearProfile::tanh_shear(b, z0))
}

/// Release a profile handle. Null is ignored.
///
/// # Safety
/// `p` must be null or a pointer obtained from a `blstab_profile_*` constructor,
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn blstab_profile_free(p: *mut blstab_profile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Evaluate the `k`-th derivative of the profile at height `z` (`k = 0` is
/// the profile itself, `k <= 4`).
///
/// # Safety
/// `p` must be a live profile handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn blstab_profile_deriv(
    p: *const blstab_profile,
    k: c_int,
    z: f64,
    out: *mut f64,
) -> blstab_status {
    if p.is_null() || out.is_null() {
        set_error("null pointer");
        return BLSTAB_NULL_POINTER;
    }
    if !(0..=4).contains(&k) || !z.is_finite() || z < 0.0 {
        set_error("profile_deriv requires 0 <= k <= 4 and finite z >= 0");
        return BLSTAB_INVALID_ARGUMENT;
    }
    let p = &(*p).0;
    guarded(|| {
        *out = p.deriv(k as usize, z);
        BLSTAB_OK
    })
}

/// Check the profile against the admissibility hypotheses; writes 1 into
/// `out_pass` when all of them hold.
///
/// # Safety
/// `p` must be a live profile handle and `out_pass` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn blstab_profile_check(
    p: *const blstab_profile,
    out_pass: *mut c_int,
) -> blstab_status {
    if p.is_null() || out_pass.is_null() {
        set_error("null pointer");
        return BLSTAB_NULL_POINTER;
    }
    let p = &(*p).0;
    guarded(|| {
        let sample = blstab::profiles::default_sample_grid(p, 2000);
        match validate_profile(p, &sample, 1e-10) {
            Ok(r) => {
                *out_pass = r.pass as c_int;
                BLSTAB_OK
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Build a half-line grid with `n` nodes. `spectral != 0` selects the
/// spectral backend, otherwise finite differences. The domain is truncated
/// at `z_max` with wall clustering strength `cluster`.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives an owned handle.
#[no_mangle]
pub unsafe extern "C" fn blstab_grid_new(
    n: usize,
    spectral: c_int,
    z_max: f64,
    cluster: f64,
    out: *mut *mut blstab_grid,
) -> blstab_status {
    if out.is_null() {
        set_error("null pointer");
        return BLSTAB_NULL_POINTER;
    }
    let backend = if spectral != 0 {
        Backend::Spectral
    } else {
        Backend::FiniteDifference
    };
    guarded(|| match SemiInfiniteGrid::build(n, backend, Mapping::Truncated { z_max, cluster }) {
        Ok(g) => {
            *out = Box::into_raw(Box::new(blstab_grid(g)));
            BLSTAB_OK
        }
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    })
}

/// Release a grid handle. Null is ignored.
///
/// # Safety
/// `g` must be null or a pointer obtained from `blstab_grid_new`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn blstab_grid_free(g: *mut blstab_grid) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Leading eigenvalue of the linearized operator at wavenumber `alpha` and
/// viscosity `nu`. `out_found` is 1 when an accepted eigenvalue exists, in
/// which case `out_re`/`out_im` carry it.
///
/// # Safety
/// All handles must be live and all output pointers valid.
#[no_mangle]
pub unsafe extern "C" fn blstab_os_leading(
    p: *const blstab_profile,
    g: *const blstab_grid,
    alpha: f64,
    nu: f64,
    out_re: *mut f64,
    out_im: *mut f64,
    out_found: *mut c_int,
) -> blstab_status {
    if p.is_null() || g.is_null() || out_re.is_null() || out_im.is_null() || out_found.is_null() {
        set_error("null pointer");
        return BLSTAB_NULL_POINTER;
    }
    let (p, g) = (&(*p).0, Arc::clone(&(*g).0));
    guarded(|| match os_leading(p, g, alpha, nu, &OsOptions::default()) {
        Ok(Some(sol)) => {
            *out_found = 1;
            *out_re = sol.lambda.re;
            *out_im = sol.lambda.im;
            BLSTAB_OK
        }
        Ok(None) => {
            *out_found = 0;
            *out_re = 0.0;
            *out_im = 0.0;
            BLSTAB_OK
        }
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    })
}

/// Maximize the growth rate over wavenumbers at viscosity `nu` using
/// `samples` coarse scan points. `out_found` is 1 when an unstable mode
/// exists; then `out_alpha` is the maximizer and `out_re`/`out_im` the
/// eigenvalue there.
///
/// # Safety
/// All handles must be live and all output pointers valid.
#[no_mangle]
pub unsafe extern "C" fn blstab_max_growth(
    p: *const blstab_profile,
    g: *const blstab_grid,
    nu: f64,
    samples: usize,
    out_alpha: *mut f64,
    out_re: *mut f64,
    out_im: *mut f64,
    out_found: *mut c_int,
) -> blstab_status {
    if p.is_null()
        || g.is_null()
        || out_alpha.is_null()
        || out_re.is_null()
        || out_im.is_null()
        || out_found.is_null()
    {
        set_error("null pointer");
        return BLSTAB_NULL_POINTER;
    }
    let (p, g) = (&(*p).0, Arc::clone(&(*g).0));
    guarded(|| {
        let range = blstab::stability::default_alpha_range(nu);
        match max_growth(p, g, nu, range, samples, &OsOptions::default()) {
            Ok((Some((alpha, sol)), _)) => {
                *out_found = 1;
                *out_alpha = alpha;
                *out_re = sol.lambda.re;
                *out_im = sol.lambda.im;
                BLSTAB_OK
            }
            Ok((None, _)) => {
                *out_found = 0;
                *out_alpha = 0.0;
                *out_re = 0.0;
                *out_im = 0.0;
                BLSTAB_OK
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Number of unstable inviscid modes at wavenumber `alpha`.
///
/// # Safety
/// All handles must be live and `out_count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn blstab_rayleigh_unstable_count(
    p: *const blstab_profile,
    g: *const blstab_grid,
    alpha: f64,
    out_count: *mut usize,
) -> blstab_status {
    if p.is_null() || g.is_null() || out_count.is_null() {
        set_error("null pointer");
        return BLSTAB_NULL_POINTER;
    }
    let (p, g) = (&(*p).0, Arc::clone(&(*g).0));
    guarded(|| match rayleigh_spectrum(p, g, alpha) {
        Ok(r) => {
            *out_count = r.modes.len();
            BLSTAB_OK
        }
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    })
}

/// Parse a profile kind name ("exponential", "erf", "jet") into a handle;
/// returns null and sets the error message on unknown names.
///
/// # Safety
/// `kind` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn blstab_profile_by_name(kind: *const c_char) -> *mut blstab_profile {
    if kind.is_null() {
        set_error("null pointer");
        return std::ptr::null_mut();
    }
    let Ok(kind) = CStr::from_ptr(kind).to_str() else {
        set_error("profile kind is not valid UTF-8");
        return std::ptr::null_mut();
    };
    match kind {
        "exponential" => box_profile(ShearProfile::exponential()),
        "erf" => box_profile(ShearProfile::erf_profile()),
        "jet" => box_profile(ShearProfile::jet()),
        other => {
            set_error(format!("unknown profile kind '{other}'"));
            std::ptr::null_mut()
        }
    }
}

//! C ABI over `fas-core`.
//!
//! Every function returns a [`FasStatus`] and writes results through out
//! pointers. On failure the message is kept per thread and can be read with
//! [`fas_last_error_message`]. Handles are created by `*_new` functions and
//! released by the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fas_core::analytic::{outage_approx, outage_exact, outage_exact_profile, outage_mrc};
use fas_core::bounds::{outage_upper_bound, outage_upper_bound_profile, BoundConstants};
use fas_core::channel::{correlation_profile, CorrelationProfile, FasConfig};
use fas_core::design::{min_size, DesignQuery};
use fas_core::mc::{mc_outage_fas, McSettings};
use fas_core::quad::QuadratureSettings;
use fas_core::specfun::{bessel_j0, marcum_q1, MarcumArgs};
use fas_core::FasError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FasStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Config = 3,
    SingularProfile = 4,
    Quadrature = 5,
    Constants = 6,
    Numerical = 7,
    Panic = 8,
}

impl From<&FasError> for FasStatus {
    fn from(e: &FasError) -> Self {
        match e {
            FasError::Domain(_) => FasStatus::Domain,
            FasError::Config(_) => FasStatus::Config,
            FasError::SingularProfile { .. } => FasStatus::SingularProfile,
            FasError::Quadrature { .. } => FasStatus::Quadrature,
            FasError::Constants(_) => FasStatus::Constants,
            FasError::Numerical(_) => FasStatus::Numerical,
        }
    }
}

/// Opaque port configuration.
pub struct FasConfigHandle(FasConfig);

/// Opaque correlation profile.
pub struct FasProfileHandle(CorrelationProfile);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Run `f`, mapping errors and panics to a status and recording the message.
fn guard<F: FnOnce() -> Result<(), FasStatus>>(f: F) -> FasStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FasStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside fas-core".into());
            FasStatus::Panic
        }
    }
}

fn fail(e: FasError) -> FasStatus {
    let s = FasStatus::from(&e);
    set_error(e.to_string());
    s
}

fn null(name: &str) -> FasStatus {
    set_error(format!("{name} is null"));
    FasStatus::NullPointer
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, FasStatus> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn get<'a, T>(p: *const T, name: &str) -> Result<&'a T, FasStatus> {
    p.as_ref().ok_or_else(|| null(name))
}

/// Message for the last failing call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn fas_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fas_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out_config` must be a valid pointer to write a handle into.
#[no_mangle]
pub unsafe extern "C" fn fas_config_new(
    n_ports: usize,
    size_wavelengths: f64,
    snr_ratio: f64,
    out_config: *mut *mut FasConfigHandle,
) -> FasStatus {
    guard(|| {
        let slot = out(out_config, "out_config")?;
        let c = FasConfig::new(n_ports, size_wavelengths, snr_ratio).map_err(fail)?;
        *slot = Box::into_raw(Box::new(FasConfigHandle(c)));
        Ok(())
    })
}

/// As [`fas_config_new`] with the threshold ratio in dB.
///
/// # Safety
/// `out_config` must be a valid pointer to write a handle into.
#[no_mangle]
pub unsafe extern "C" fn fas_config_from_db(
    n_ports: usize,
    size_wavelengths: f64,
    snr_ratio_db: f64,
    out_config: *mut *mut FasConfigHandle,
) -> FasStatus {
    guard(|| {
        let slot = out(out_config, "out_config")?;
        let c = FasConfig::from_db(n_ports, size_wavelengths, snr_ratio_db).map_err(fail)?;
        *slot = Box::into_raw(Box::new(FasConfigHandle(c)));
        Ok(())
    })
}

/// # Safety
/// `config` must come from `fas_config_new`/`fas_config_from_db` and not be
/// used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fas_config_free(config: *mut FasConfigHandle) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// # Safety
/// `config` must be a live handle; `out_ratio` writable.
#[no_mangle]
pub unsafe extern "C" fn fas_config_snr_ratio(
    config: *const FasConfigHandle,
    out_ratio: *mut f64,
) -> FasStatus {
    guard(|| {
        let c = get(config, "config")?;
        *out(out_ratio, "out_ratio")? = c.0.snr_ratio();
        Ok(())
    })
}

/// Correlation profile of an evenly spaced configuration.
///
/// # Safety
/// `config` must be a live handle; `out_profile` writable.
#[no_mangle]
pub unsafe extern "C" fn fas_profile_from_config(
    config: *const FasConfigHandle,
    out_profile: *mut *mut FasProfileHandle,
) -> FasStatus {
    guard(|| {
        let c = get(config, "config")?;
        let slot = out(out_profile, "out_profile")?;
        *slot = Box::into_raw(Box::new(FasProfileHandle(correlation_profile(&c.0))));
        Ok(())
    })
}

/// Profile from explicit correlations; `mu[0]` must be 0.
///
/// # Safety
/// `mu` must point to `len` readable doubles; `out_profile` writable.
#[no_mangle]
pub unsafe extern "C" fn fas_profile_from_mu(
    mu: *const f64,
    len: usize,
    out_profile: *mut *mut FasProfileHandle,
) -> FasStatus {
    guard(|| {
        if mu.is_null() {
            return Err(null("mu"));
        }
        let slot = out(out_profile, "out_profile")?;
        let values = std::slice::from_raw_parts(mu, len).to_vec();
        let p = CorrelationProfile::from_mu(values).map_err(fail)?;
        *slot = Box::into_raw(Box::new(FasProfileHandle(p)));
        Ok(())
    })
}

/// # Safety
/// `profile` must come from a `fas_profile_*` constructor and not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn fas_profile_free(profile: *mut FasProfileHandle) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Number of ports in `profile`.
///
/// # Safety
/// `profile` must be a live handle; `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn fas_profile_len(
    profile: *const FasProfileHandle,
    out_len: *mut usize,
) -> FasStatus {
    guard(|| {
        let p = get(profile, "profile")?;
        *out(out_len, "out_len")? = p.0.n_ports();
        Ok(())
    })
}

/// Copy up to `cap` correlations into `buf`.
///
/// # Safety
/// `profile` must be a live handle and `buf` must have room for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn fas_profile_mu(
    profile: *const FasProfileHandle,
    buf: *mut f64,
    cap: usize,
) -> FasStatus {
    guard(|| {
        let p = get(profile, "profile")?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let mu = p.0.mu();
        let n = mu.len().min(cap);
        ptr::copy_nonoverlapping(mu.as_ptr(), buf, n);
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle; `out_p` writable.
#[no_mangle]
pub unsafe extern "C" fn fas_outage_exact(config: *const FasConfigHandle, out_p: *mut f64) -> FasStatus {
    guard(|| {
        let c = get(config, "config")?;
        let slot = out(out_p, "out_p")?;
        *slot = outage_exact(&c.0, &QuadratureSettings::default()).map_err(fail)?;
        Ok(())
    })
}

/// Exact outage for an arbitrary profile at linear threshold ratio `x`.
///
/// # Safety
/// `profile` must be a live handle; `out_p` writable.
#[no_mangle]
pub unsafe extern "C" fn fas_outage_exact_profile(
    profile: *const FasProfileHandle,
    x: f64,
    out_p: *mut f64,
) -> FasStatus {
    guard(|| {
        let p = get(profile, "profile")?;
        let slot = out(out_p, "out_p")?;
        *slot = outage_exact_profile(&p.0, x, &QuadratureSettings::default()).map_err(fail)?;
        Ok(())
    })
}

/// Closed-form approximation; may be negative for many ports.
///
/// # Safety
/// `config` must be a live handle; `out_p` writable.
#[no_mangle]
pub unsafe extern "C" fn fas_outage_approx(config: *const FasConfigHandle, out_p: *mut f64) -> FasStatus {
    guard(|| {
        let c = get(config, "config")?;
        let slot = out(out_p, "out_p")?;
        *slot = outage_approx(&c.0).map_err(fail)?;
        Ok(())
    })
}

/// Upper bound with parameter `kappa > 1`.
///
/// # Safety
/// `config` must be a live handle; `out_p` writable.
#[no_mangle]
pub unsafe extern "C" fn fas_outage_upper_bound(
    config: *const FasConfigHandle,
    kappa: f64,
    out_p: *mut f64,
) -> FasStatus {
    guard(|| {
        let c = get(config, "config")?;
        let slot = out(out_p, "out_p")?;
        let k = BoundConstants::new(kappa).map_err(fail)?;
        *slot = outage_upper_bound(&c.0, &k).map_err(fail)?;
        Ok(())
    })
}

/// # Safety
/// `profile` must be a live handle; `out_p` writable.
#[no_mangle]
pub unsafe extern "C" fn fas_outage_upper_bound_profile(
    profile: *const FasProfileHandle,
    x: f64,
    kappa: f64,
    out_p: *mut f64,
) -> FasStatus {
    guard(|| {
        let p = get(profile, "profile")?;
        let slot = out(out_p, "out_p")?;
        let k = BoundConstants::new(kappa).map_err(fail)?;
        *slot = outage_upper_bound_profile(&p.0, x, &k).map_err(fail)?;
        Ok(())
    })
}

/// Outage of `branches`-branch MRC at linear threshold ratio `x`.
///
/// # Safety
/// `out_p` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fas_outage_mrc(branches: usize, x: f64, out_p: *mut f64) -> FasStatus {
    guard(|| {
        let slot = out(out_p, "out_p")?;
        *slot = outage_mrc(branches, x).map_err(fail)?;
        Ok(())
    })
}

/// Seeded MC estimate of selection outage and its 95% half width.
///
/// # Safety
/// `config` must be a live handle; both out pointers writable.
#[no_mangle]
pub unsafe extern "C" fn fas_mc_outage(
    config: *const FasConfigHandle,
    trials: u64,
    seed: u64,
    workers: usize,
    out_p_hat: *mut f64,
    out_half_width: *mut f64,
) -> FasStatus {
    guard(|| {
        let c = get(config, "config")?;
        let p = out(out_p_hat, "out_p_hat")?;
        let hw = out(out_half_width, "out_half_width")?;
        let s = McSettings::new(trials, seed, workers).map_err(fail)?;
        let est = mc_outage_fas(&c.0, &s).map_err(fail)?;
        *p = est.p_hat;
        *hw = est.half_width_95;
        Ok(())
    })
}

/// First-order Marcum Q-function.
///
/// # Safety
/// `out_q` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fas_marcum_q1(a: f64, b: f64, out_q: *mut f64) -> FasStatus {
    guard(|| {
        let slot = out(out_q, "out_q")?;
        *slot = marcum_q1(MarcumArgs::new(a, b).map_err(fail)?);
        Ok(())
    })
}

/// Bessel function of the first kind, order zero.
///
/// # Safety
/// `out_j0` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fas_bessel_j0(x: f64, out_j0: *mut f64) -> FasStatus {
    guard(|| {
        let slot = out(out_j0, "out_j0")?;
        *slot = bessel_j0(x).map_err(fail)?;
        Ok(())
    })
}

/// Minimum size in wavelengths for `n_ports >= 4` ports to beat
/// `branches`-branch MRC under the bound. An infeasible query still returns
/// `FAS_STATUS_OK` with `*out_feasible = false` and `*out_size` set to NaN.
///
/// # Safety
/// Both out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn fas_min_size(
    branches: usize,
    x: f64,
    kappa: f64,
    n_ports: usize,
    out_size: *mut f64,
    out_feasible: *mut bool,
) -> FasStatus {
    guard(|| {
        let size = out(out_size, "out_size")?;
        let feasible = out(out_feasible, "out_feasible")?;
        let k = BoundConstants::new(kappa).map_err(fail)?;
        let q = DesignQuery::new(branches, x, k).map_err(fail)?.with_n_ports(n_ports);
        let a = min_size(&q).map_err(fail)?;
        if let Some(g) = a.guard_report() {
            set_error(g);
        }
        *size = a.value.unwrap_or(f64::NAN);
        *feasible = a.feasible;
        Ok(())
    })
}

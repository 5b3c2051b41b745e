//! C interface to `pvtau`.
//!
//! Every fallible function returns a [`PvStatus`]; results go through out
//! pointers, which are left untouched on failure. The message of the last
//! failure on the calling thread is available from [`pv_last_error`].
//! Handles are opaque and must be released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use pvtau::connection::{labels_from_sigma_eta, log_upsilon_0_iinf, log_upsilon_iinf_pinf, sigma_eta_from_x, x_from_sigma_eta};
use pvtau::fredholm_det::{log_tau_fredholm, log_tau_fredholm_normalized};
use pvtau::params::PVParams;
use pvtau::pv_ode::{verify_ray, Ray};
use pvtau::special_fn::log_barnes_g;
use pvtau::tau_expansions::TauSeries;
use pvtau::PvError;

/// Status codes; the names match the error codes of the command-line tool.
#[repr(C)]
#[allow(non_camel_case_types)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PvStatus {
    PV_OK = 0,
    PV_E_NULL_POINTER = 1,
    PV_E_INVALID_ARGUMENT = 2,
    PV_E_PANIC = 3,
    PV_E_POLE = 10,
    PV_E_G_ZERO = 11,
    PV_E_G_HAT_SINGULAR = 12,
    PV_E_COEFF_POLE = 13,
    PV_E_RESONANCE = 14,
    PV_E_NON_INVERTIBLE = 15,
    PV_E_DEPTH = 16,
    PV_E_CANCELLATION = 17,
    PV_E_GK_ORDER = 18,
    PV_E_GENERICITY = 19,
    PV_E_SERIES_MARGIN = 20,
    PV_E_POLE_PROXIMITY = 21,
    PV_E_RESIDUAL_DRIFT = 22,
    PV_E_ORDER = 23,
    PV_E_CONFIG = 24,
    PV_E_IO = 25,
}

impl From<&PvError> for PvStatus {
    fn from(e: &PvError) -> Self {
        match e {
            PvError::Pole { .. } => PvStatus::PV_E_POLE,
            PvError::GZero { .. } => PvStatus::PV_E_G_ZERO,
            PvError::IntegerSingularity { .. } => PvStatus::PV_E_G_HAT_SINGULAR,
            PvError::CoefficientPole { .. } => PvStatus::PV_E_COEFF_POLE,
            PvError::Resonance { .. } => PvStatus::PV_E_RESONANCE,
            PvError::NonInvertible { .. } => PvStatus::PV_E_NON_INVERTIBLE,
            PvError::InsufficientDepth { .. } => PvStatus::PV_E_DEPTH,
            PvError::CancellationFailure { .. } => PvStatus::PV_E_CANCELLATION,
            PvError::NonSolvableOrder { .. } => PvStatus::PV_E_GK_ORDER,
            PvError::Genericity { .. } => PvStatus::PV_E_GENERICITY,
            PvError::SeriesMargin { .. } => PvStatus::PV_E_SERIES_MARGIN,
            PvError::PoleProximity { .. } => PvStatus::PV_E_POLE_PROXIMITY,
            PvError::ResidualDrift { .. } => PvStatus::PV_E_RESIDUAL_DRIFT,
            PvError::OrderTooLarge { .. } => PvStatus::PV_E_ORDER,
            PvError::Config(_) => PvStatus::PV_E_CONFIG,
            PvError::Io(_) => PvStatus::PV_E_IO,
        }
    }
}

#[repr(C)]
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct PvComplex {
    pub re: f64,
    pub im: f64,
}

impl From<PvComplex> for Complex64 {
    fn from(z: PvComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

impl From<Complex64> for PvComplex {
    fn from(z: Complex64) -> Self {
        PvComplex { re: z.re, im: z.im }
    }
}

#[repr(C)]
#[allow(non_camel_case_types)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PvChannel {
    PV_CHANNEL_ZERO = 0,
    PV_CHANNEL_I_INFINITY = 1,
    PV_CHANNEL_PLUS_INFINITY = 2,
}

#[repr(C)]
#[allow(non_camel_case_types)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PvRay {
    PV_RAY_POSITIVE_REAL = 0,
    PV_RAY_POSITIVE_IMAGINARY = 1,
}

/// Exponents (θ₀, θ_t, θ_*) at c = 1.
pub struct PvParams {
    inner: PVParams,
}

/// A tau-function expansion around one of 0, i∞, +∞.
pub struct PvTauSeries {
    inner: TauSeries,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Failure {
    Status(PvStatus, String),
    Core(PvError),
}

impl From<PvError> for Failure {
    fn from(e: PvError) -> Self {
        Failure::Core(e)
    }
}

fn null() -> Failure {
    Failure::Status(PvStatus::PV_E_NULL_POINTER, "null pointer argument".into())
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PvStatus::PV_OK,
        Ok(Err(Failure::Core(e))) => {
            set_error(format!("{}: {e}", e.code()));
            PvStatus::from(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            PvStatus::PV_E_PANIC
        }
    }
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(null)
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

/// Message of the last failure on this thread; valid until the next failing call.
#[no_mangle]
pub extern "C" fn pv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Machine-readable name of a status, e.g. `"E_RESONANCE"`.
#[no_mangle]
pub extern "C" fn pv_status_name(status: PvStatus) -> *const c_char {
    let s: &'static std::ffi::CStr = match status {
        PvStatus::PV_OK => c"OK",
        PvStatus::PV_E_NULL_POINTER => c"E_NULL_POINTER",
        PvStatus::PV_E_INVALID_ARGUMENT => c"E_INVALID_ARGUMENT",
        PvStatus::PV_E_PANIC => c"E_PANIC",
        PvStatus::PV_E_POLE => c"E_POLE",
        PvStatus::PV_E_G_ZERO => c"E_G_ZERO",
        PvStatus::PV_E_G_HAT_SINGULAR => c"E_G_HAT_SINGULAR",
        PvStatus::PV_E_COEFF_POLE => c"E_COEFF_POLE",
        PvStatus::PV_E_RESONANCE => c"E_RESONANCE",
        PvStatus::PV_E_NON_INVERTIBLE => c"E_NON_INVERTIBLE",
        PvStatus::PV_E_DEPTH => c"E_DEPTH",
        PvStatus::PV_E_CANCELLATION => c"E_CANCELLATION",
        PvStatus::PV_E_GK_ORDER => c"E_GK_ORDER",
        PvStatus::PV_E_GENERICITY => c"E_GENERICITY",
        PvStatus::PV_E_SERIES_MARGIN => c"E_SERIES_MARGIN",
        PvStatus::PV_E_POLE_PROXIMITY => c"E_POLE_PROXIMITY",
        PvStatus::PV_E_RESIDUAL_DRIFT => c"E_RESIDUAL_DRIFT",
        PvStatus::PV_E_ORDER => c"E_ORDER",
        PvStatus::PV_E_CONFIG => c"E_CONFIG",
        PvStatus::PV_E_IO => c"E_IO",
    };
    s.as_ptr()
}

/// # Safety
/// `out_params` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pv_params_new(
    theta0: PvComplex,
    thetat: PvComplex,
    theta_star: PvComplex,
    out_params: *mut *mut PvParams,
) -> PvStatus {
    guard(|| {
        let slot = out(out_params)?;
        let inner = PVParams::new(theta0.into(), thetat.into(), theta_star.into());
        let finite = [inner.theta0, inner.thetat, inner.theta_star].iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite {
            return Err(Failure::Status(PvStatus::PV_E_INVALID_ARGUMENT, "non-finite exponent".into()));
        }
        *slot = Box::into_raw(Box::new(PvParams { inner }));
        Ok(())
    })
}

/// # Safety
/// `params` must be null or a handle from [`pv_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pv_params_free(params: *mut PvParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Builds the expansion of `channel` with label pair `(a, b)`: (σ, η), (ν, ρ) or (ω, ξ).
///
/// # Safety
/// `params` must be a live handle; `out_series` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pv_series_new(
    params: *const PvParams,
    channel: PvChannel,
    a: PvComplex,
    b: PvComplex,
    order: usize,
    window: usize,
    out_series: *mut *mut PvTauSeries,
) -> PvStatus {
    guard(|| {
        let p = &handle(params)?.inner;
        let slot = out(out_series)?;
        let (a, b) = (a.into(), b.into());
        let inner = match channel {
            PvChannel::PV_CHANNEL_ZERO => TauSeries::zero(p, a, b, order, window)?,
            PvChannel::PV_CHANNEL_I_INFINITY => TauSeries::iinf(p, a, b, order, window)?,
            PvChannel::PV_CHANNEL_PLUS_INFINITY => TauSeries::pinf(p, a, b, order, window)?,
        };
        *slot = Box::into_raw(Box::new(PvTauSeries { inner }));
        Ok(())
    })
}

/// # Safety
/// `series` must be null or a handle from [`pv_series_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pv_series_free(series: *mut PvTauSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// # Safety
/// `series` must be a live handle; `out_log_tau` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pv_series_log_tau(series: *const PvTauSeries, t: PvComplex, out_log_tau: *mut PvComplex) -> PvStatus {
    guard(|| {
        let s = &handle(series)?.inner;
        let slot = out(out_log_tau)?;
        *slot = s.log_value(t.into())?.into();
        Ok(())
    })
}

/// Writes (H, dH/dt, d²H/dt²) to `out_h[0..3]`.
///
/// # Safety
/// `series` must be a live handle; `out_h` must point to three writable values.
#[no_mangle]
pub unsafe extern "C" fn pv_series_hamiltonian(series: *const PvTauSeries, t: PvComplex, out_h: *mut PvComplex) -> PvStatus {
    guard(|| {
        let s = &handle(series)?.inner;
        if out_h.is_null() {
            return Err(null());
        }
        let h = s.hamiltonian(t.into())?;
        let dst = std::slice::from_raw_parts_mut(out_h, 3);
        for (d, v) in dst.iter_mut().zip(h) {
            *d = v.into();
        }
        Ok(())
    })
}

/// log τ from the Fredholm determinant; `normalized` rescales it to the t → 0 series convention.
///
/// # Safety
/// `params` must be a live handle; `out_log_tau` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pv_log_tau_fredholm(
    params: *const PvParams,
    t: PvComplex,
    sigma: PvComplex,
    eta: PvComplex,
    modes: usize,
    normalized: bool,
    out_log_tau: *mut PvComplex,
) -> PvStatus {
    guard(|| {
        let p = &handle(params)?.inner;
        let slot = out(out_log_tau)?;
        if modes == 0 {
            return Err(Failure::Status(PvStatus::PV_E_INVALID_ARGUMENT, "modes must be positive".into()));
        }
        let f = if normalized { log_tau_fredholm_normalized } else { log_tau_fredholm };
        *slot = f(t.into(), sigma.into(), eta.into(), p, modes)?.into();
        Ok(())
    })
}

/// # Safety
/// `params` must be a live handle; the out pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pv_monodromy_from_sigma_eta(
    params: *const PvParams,
    sigma: PvComplex,
    eta: PvComplex,
    out_xplus: *mut PvComplex,
    out_xminus: *mut PvComplex,
) -> PvStatus {
    guard(|| {
        let p = &handle(params)?.inner;
        let (xp_slot, xm_slot) = (out(out_xplus)?, out(out_xminus)?);
        let (xp, xm) = x_from_sigma_eta(sigma.into(), eta.into(), p)?;
        *xp_slot = xp.into();
        *xm_slot = xm.into();
        Ok(())
    })
}

/// Inverse of [`pv_monodromy_from_sigma_eta`], with σ reduced to the canonical strip.
///
/// # Safety
/// `params` must be a live handle; the out pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pv_sigma_eta_from_monodromy(
    params: *const PvParams,
    xplus: PvComplex,
    xminus: PvComplex,
    out_sigma: *mut PvComplex,
    out_eta: *mut PvComplex,
) -> PvStatus {
    guard(|| {
        let p = &handle(params)?.inner;
        let (s_slot, e_slot) = (out(out_sigma)?, out(out_eta)?);
        let (s, e) = sigma_eta_from_x(xplus.into(), xminus.into(), p)?;
        *s_slot = s.into();
        *e_slot = e.into();
        Ok(())
    })
}

/// log Υ_{0→i∞} for the solution with short-distance labels (σ, η).
///
/// # Safety
/// `params` must be a live handle; `out_log` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pv_log_upsilon_0_iinf(
    params: *const PvParams,
    sigma: PvComplex,
    eta: PvComplex,
    out_log: *mut PvComplex,
) -> PvStatus {
    guard(|| {
        let p = &handle(params)?.inner;
        let slot = out(out_log)?;
        let (labels, _) = labels_from_sigma_eta(sigma.into(), eta.into(), p)?;
        let (nu, lambda) = match (labels.nu, labels.lambda) {
            (Some(n), Some(l)) => (n, l),
            _ => return Err(PvError::Genericity { condition: "nu or lambda undefined".into() }.into()),
        };
        *slot = log_upsilon_0_iinf::<f64>(sigma.into(), nu, lambda, p.theta0, p.thetat, p.theta_star)?.into();
        Ok(())
    })
}

/// log Υ_{i∞→+∞}(ν, ω).
///
/// # Safety
/// `out_log` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pv_log_upsilon_iinf_pinf(nu: PvComplex, omega: PvComplex, out_log: *mut PvComplex) -> PvStatus {
    guard(|| {
        let slot = out(out_log)?;
        *slot = log_upsilon_iinf_pinf::<f64>(nu.into(), omega.into())?.into();
        Ok(())
    })
}

/// Principal log G(1+z) of the Barnes G-function.
///
/// # Safety
/// `out_log` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pv_log_barnes_g1p(z: PvComplex, out_log: *mut PvComplex) -> PvStatus {
    guard(|| {
        let slot = out(out_log)?;
        *slot = log_barnes_g::<f64>(z.into())?.into();
        Ok(())
    })
}

/// Integrates σ-PV from the (σ, η) series along `ray` to `radius` and writes the
/// deviation |log(Υ·τ_asymptotic) − log τ_ode| there.
///
/// # Safety
/// `params` must be a live handle; `out_deviation` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pv_verify_ray(
    params: *const PvParams,
    sigma: PvComplex,
    eta: PvComplex,
    ray: PvRay,
    order: usize,
    window: usize,
    radius: f64,
    out_deviation: *mut f64,
) -> PvStatus {
    guard(|| {
        let p = &handle(params)?.inner;
        let slot = out(out_deviation)?;
        if !(radius.is_finite() && radius > pvtau::pv_ode::SEED_RADIUS) {
            return Err(Failure::Status(PvStatus::PV_E_INVALID_ARGUMENT, "radius must exceed the seed radius".into()));
        }
        let ray = match ray {
            PvRay::PV_RAY_POSITIVE_REAL => Ray::PositiveReal,
            PvRay::PV_RAY_POSITIVE_IMAGINARY => Ray::PositiveImaginary,
        };
        let (labels, _) = labels_from_sigma_eta(sigma.into(), eta.into(), p)?;
        let (_, report) = verify_ray(p, sigma.into(), eta.into(), &labels, ray, order, window, &[radius])?;
        *slot = report.samples[0].deviation;
        Ok(())
    })
}

//! C ABI over `marketfield`.
//!
//! Every function returns an [`MfStatus`]; results come back through out
//! pointers. Objects are opaque handles created by `*_new`/`*_sample`/
//! `*_reconstruct` and released with the matching `*_free`. The message of
//! the last failure on the calling thread is available from
//! [`mf_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use marketfield::config::RunConfig;
use marketfield::figures::{sample_figure, FigureData, FigureSpec};
use marketfield::frenet::{polarization_rotation, reconstruct_soliton_curve, Curve};
use marketfield::soliton::{self, SolitonParams};
use marketfield::Error;

/// Status codes. `MF_STATUS_OK` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    ZeroRadius = 3,
    OutOfDomain = 4,
    InvalidStep = 5,
    BufferTooSmall = 6,
    UnknownKey = 7,
    Internal = 8,
    Panic = 9,
}

/// Soliton parameters.
pub struct MfParams(SolitonParams);

/// Reconstructed choice curve.
pub struct MfCurve {
    curve: Curve,
    rms: f64,
}

/// Sampled figure grid.
pub struct MfFigure(FigureData);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> MfStatus {
    match e {
        Error::InvalidParameter { .. } | Error::InvalidCutoff { .. } | Error::NonpositiveRadius(_) => {
            MfStatus::InvalidParameter
        }
        Error::ZeroRadius => MfStatus::ZeroRadius,
        Error::OutOfDomain(_) => MfStatus::OutOfDomain,
        Error::InvalidStep { .. } => MfStatus::InvalidStep,
        Error::UnknownKey(_) => MfStatus::UnknownKey,
        _ => MfStatus::Internal,
    }
}

fn guard<F: FnOnce() -> Result<(), MfStatus>>(f: F) -> MfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MfStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_last_error("panic inside marketfield");
            MfStatus::Panic
        }
    }
}

fn fail(e: Error) -> MfStatus {
    set_last_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> MfStatus {
    set_last_error(&format!("{what} is null"));
    MfStatus::NullPointer
}

unsafe fn params_ref<'a>(p: *const MfParams) -> Result<&'a SolitonParams, MfStatus> {
    p.as_ref().map(|p| &p.0).ok_or_else(|| null("params"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), MfStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn mf_status_message(status: MfStatus) -> *const c_char {
    let s: &'static CStr = match status {
        MfStatus::Ok => c"ok",
        MfStatus::NullPointer => c"null pointer argument",
        MfStatus::InvalidParameter => c"invalid parameter",
        MfStatus::ZeroRadius => c"transverse radius is zero",
        MfStatus::OutOfDomain => c"argument outside the function's domain",
        MfStatus::InvalidStep => c"invalid integration step",
        MfStatus::BufferTooSmall => c"output buffer too small",
        MfStatus::UnknownKey => c"unknown parameter key",
        MfStatus::Internal => c"internal error",
        MfStatus::Panic => c"panic caught at the FFI boundary",
    };
    s.as_ptr()
}

/// Message of the last failure on this thread. Valid until the next failing
/// call on the same thread; empty when nothing failed yet.
#[no_mangle]
pub extern "C" fn mf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates parameters with the given β and τ and default remaining fields.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn mf_params_new(beta: f64, tau: f64, out: *mut *mut MfParams) -> MfStatus {
    guard(|| {
        let p = SolitonParams::new(beta, tau).map_err(fail)?;
        write(out, Box::into_raw(Box::new(MfParams(p))))
    })
}

/// Sets one parameter by name: `beta`, `tau`, `l_scale`, `L`, `activity`,
/// `gamma` or `d`. The change is rejected if it makes the set invalid.
///
/// # Safety
/// `params` must come from [`mf_params_new`]; `key` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mf_params_set(params: *mut MfParams, key: *const c_char, value: f64) -> MfStatus {
    guard(|| {
        let p = params.as_mut().ok_or_else(|| null("params"))?;
        if key.is_null() {
            return Err(null("key"));
        }
        let key = CStr::from_ptr(key)
            .to_str()
            .map_err(|_| fail(Error::UnknownKey("<non-utf8>".into())))?;
        let mut next = p.0;
        match key {
            "beta" => next.beta = value,
            "tau" => next.tau = value,
            "l_scale" => next.l_scale = value,
            "L" => next.half_length = value,
            "activity" => next.activity = value,
            "gamma" => next.gamma = value,
            "d" => next.cutoff = value,
            other => return Err(fail(Error::UnknownKey(other.into()))),
        }
        next.validate().map_err(fail)?;
        p.0 = next;
        Ok(())
    })
}

/// # Safety
/// `params` must come from [`mf_params_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn mf_params_free(params: *mut MfParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Curvature `κ(s, t)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mf_curvature(params: *const MfParams, s: f64, t: f64, out: *mut f64) -> MfStatus {
    guard(|| write(out, soliton::curvature(params_ref(params)?, s, t)))
}

/// Hasimoto field `ψ(s, t)` as real and imaginary parts.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mf_hasimoto_psi(
    params: *const MfParams,
    s: f64,
    t: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> MfStatus {
    guard(|| {
        let psi = soliton::hasimoto_psi(params_ref(params)?, s, t);
        write(out_re, psi.re)?;
        write(out_im, psi.im)
    })
}

/// Choice components `(c1, c2, c3)` into `out[0..3]`.
///
/// # Safety
/// `out` must point to three writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mf_choice_components(params: *const MfParams, s: f64, t: f64, out: *mut f64) -> MfStatus {
    guard(|| {
        let c = soliton::choice_components(params_ref(params)?, s, t).as_array();
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(c.as_ptr(), out, 3);
        Ok(())
    })
}

/// Derived fields `(θ3, c3, p3)` at arclength `arc`, time `t` and transverse
/// position `(x1, x2)` into `out[0..3]`.
///
/// # Safety
/// `out` must point to three writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mf_derived_fields(
    params: *const MfParams,
    arc: f64,
    t: f64,
    x1: f64,
    x2: f64,
    out: *mut f64,
) -> MfStatus {
    guard(|| {
        let d = soliton::derived_fields(params_ref(params)?, arc, t, x1, x2).map_err(fail)?;
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping([d.theta3, d.c3, d.p3].as_ptr(), out, 3);
        Ok(())
    })
}

/// Demand-circle radius for a choice value in `(0, 1]`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mf_demand_radius(ch_mag: f64, a: f64, out: *mut f64) -> MfStatus {
    guard(|| write(out, soliton::demand_radius(ch_mag, a).map_err(fail)?))
}

/// Torsion callback: `tau(s, user_data)`.
pub type MfTorsionFn = Option<unsafe extern "C" fn(f64, *mut c_void) -> f64>;

/// Polarization rotation `∫₀^length τ(s) ds`.
///
/// # Safety
/// `tau` must be safe to call with `user_data` from this thread.
#[no_mangle]
pub unsafe extern "C" fn mf_polarization_rotation(
    tau: MfTorsionFn,
    user_data: *mut c_void,
    length: f64,
    out: *mut f64,
) -> MfStatus {
    guard(|| {
        let f = tau.ok_or_else(|| null("tau"))?;
        write(out, polarization_rotation(|s| f(s, user_data), length))
    })
}

/// Integrates the Frenet system for the soliton at time `t` over
/// `[s_min, s_max]` and aligns it with the closed-form curve. The alignment
/// RMS is written to `out_rms` when non-null.
///
/// # Safety
/// Pointers must be valid; `out_rms` may be null.
#[no_mangle]
pub unsafe extern "C" fn mf_curve_reconstruct(
    params: *const MfParams,
    t: f64,
    s_min: f64,
    s_max: f64,
    step: f64,
    out: *mut *mut MfCurve,
    out_rms: *mut f64,
) -> MfStatus {
    guard(|| {
        let (curve, report) = reconstruct_soliton_curve(params_ref(params)?, t, (s_min, s_max), step).map_err(fail)?;
        if !out_rms.is_null() {
            out_rms.write(report.rms_after_alignment);
        }
        write(
            out,
            Box::into_raw(Box::new(MfCurve {
                curve,
                rms: report.rms_after_alignment,
            })),
        )
    })
}

/// Number of samples in a curve.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mf_curve_len(curve: *const MfCurve, out: *mut usize) -> MfStatus {
    guard(|| write(out, curve.as_ref().ok_or_else(|| null("curve"))?.curve.len()))
}

/// Alignment RMS recorded at reconstruction.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mf_curve_rms(curve: *const MfCurve, out: *mut f64) -> MfStatus {
    guard(|| write(out, curve.as_ref().ok_or_else(|| null("curve"))?.rms))
}

/// Copies positions as `x0 y0 z0 x1 …` into `buf` (`3 * len` doubles).
///
/// # Safety
/// `buf` must hold `buf_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mf_curve_positions(curve: *const MfCurve, buf: *mut f64, buf_len: usize) -> MfStatus {
    guard(|| {
        let c = &curve.as_ref().ok_or_else(|| null("curve"))?.curve;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if buf_len < 3 * c.len() {
            set_last_error(&format!("need {} doubles, got {buf_len}", 3 * c.len()));
            return Err(MfStatus::BufferTooSmall);
        }
        for (i, p) in c.positions().enumerate() {
            ptr::copy_nonoverlapping(p.as_ptr(), buf.add(3 * i), 3);
        }
        Ok(())
    })
}

/// # Safety
/// `curve` must come from [`mf_curve_reconstruct`] or be null.
#[no_mangle]
pub unsafe extern "C" fn mf_curve_free(curve: *mut MfCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Samples figure `id` (1-8) on an `n_s × n_t` grid. Figures 6-8 use the
/// default transverse offsets.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn mf_figure_sample(
    id: u8,
    params: *const MfParams,
    s_min: f64,
    s_max: f64,
    n_s: usize,
    t_min: f64,
    t_max: f64,
    n_t: usize,
    out: *mut *mut MfFigure,
) -> MfStatus {
    guard(|| {
        let cfg = RunConfig {
            params: *params_ref(params)?,
            s_min,
            s_max,
            n_s,
            t_min,
            t_max,
            n_t,
            ..RunConfig::default()
        };
        let spec = FigureSpec::new(id).map_err(fail)?;
        let data = sample_figure(spec, &cfg).map_err(fail)?;
        write(out, Box::into_raw(Box::new(MfFigure(data))))
    })
}

/// Grid dimensions of a sampled figure.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mf_figure_dims(fig: *const MfFigure, n_s: *mut usize, n_t: *mut usize) -> MfStatus {
    guard(|| {
        let f = &fig.as_ref().ok_or_else(|| null("figure"))?.0;
        write(n_s, f.xs.len())?;
        write(n_t, f.ts.len())
    })
}

/// Copies values, `t` outer and `s` inner, into `buf`.
///
/// # Safety
/// `buf` must hold `buf_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mf_figure_values(fig: *const MfFigure, buf: *mut f64, buf_len: usize) -> MfStatus {
    guard(|| {
        let f = &fig.as_ref().ok_or_else(|| null("figure"))?.0;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if buf_len < f.values.len() {
            set_last_error(&format!("need {} doubles, got {buf_len}", f.values.len()));
            return Err(MfStatus::BufferTooSmall);
        }
        ptr::copy_nonoverlapping(f.values.as_ptr(), buf, f.values.len());
        Ok(())
    })
}

/// # Safety
/// `fig` must come from [`mf_figure_sample`] or be null.
#[no_mangle]
pub unsafe extern "C" fn mf_figure_free(fig: *mut MfFigure) {
    if !fig.is_null() {
        drop(Box::from_raw(fig));
    }
}

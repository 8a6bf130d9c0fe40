//! C ABI for `impulse-geo`.
//!
//! Objects are opaque handles created by `ig_wave_*` and `ig_integrate` and
//! released with the matching `ig_*_free`. Every fallible function returns an
//! [`IgStatus`]; on failure a message is available from
//! [`ig_last_error_message`] on the same thread. Panics never cross the
//! boundary.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use impulse_geo::dynamics::{integrate_impulsive_geodesic, GeodesicPath, InitialData, IntegrationOptions, WaveSpacetime};
use impulse_geo::existence::{certify_at, certify_auto, CertifyOptions, ExistenceCertificate};
use impulse_geo::harness::ScenarioConfig;
use impulse_geo::limits::limit_geodesic;
use impulse_geo::scenarios::Scenario;
use impulse_geo::Error;

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Domain = 3,
    Integration = 4,
    Numerical = 5,
    Panic = 6,
    OutOfRange = 7,
}

/// A wave space-time: manifold, profile and delta net.
pub struct IgWave {
    wave: WaveSpacetime,
}

/// An integrated regularized geodesic.
pub struct IgPath {
    path: GeodesicPath,
}

/// Plain-data copy of an existence certificate.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IgCertificate {
    pub eps: f64,
    pub alpha: f64,
    pub eps0: f64,
    pub b: f64,
    pub c: f64,
    pub i2_radius: f64,
    pub norm_f1: f64,
    pub norm_f2: f64,
    pub k: f64,
    pub lip_f1: f64,
    pub lip_f2: f64,
}

impl From<&ExistenceCertificate> for IgCertificate {
    fn from(c: &ExistenceCertificate) -> Self {
        Self {
            eps: c.eps.unwrap_or(f64::NAN),
            alpha: c.alpha,
            eps0: c.eps0,
            b: c.b,
            c: c.c,
            i2_radius: c.i2_radius,
            norm_f1: c.norm_f1,
            norm_f2: c.norm_f2,
            k: c.k,
            lip_f1: c.lip_f1,
            lip_f2: c.lip_f2,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> IgStatus {
    match e {
        Error::Domain { .. } => IgStatus::Domain,
        Error::Integration(_) => IgStatus::Integration,
        e if e.is_validation() => IgStatus::InvalidInput,
        _ => IgStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), IgStatus>) -> IgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IgStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            IgStatus::Panic
        }
    }
}

fn fail(e: Error) -> IgStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> IgStatus {
    set_error(format!("null pointer: {what}"));
    IgStatus::NullPointer
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, IgStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        IgStatus::InvalidInput
    })
}

unsafe fn read_vec(p: *const f64, n: usize, what: &str) -> Result<Vec<f64>, IgStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, n).to_vec())
}

unsafe fn wave_ref<'a>(w: *const IgWave) -> Result<&'a IgWave, IgStatus> {
    w.as_ref().ok_or_else(|| null("wave"))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length excluding the NUL.
#[no_mangle]
pub unsafe extern "C" fn ig_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[][..], |c| c.as_bytes());
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ig_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds one of the built-in scenarios' space-times, e.g.
/// `("hyperbolic-half-plane", "gaussian-bump", "mollifier")`.
#[no_mangle]
pub unsafe extern "C" fn ig_wave_builtin(
    manifold: *const c_char,
    profile: *const c_char,
    net: *const c_char,
    out: *mut *mut IgWave,
) -> IgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (m, p, n) = (read_str(manifold, "manifold")?, read_str(profile, "profile")?, read_str(net, "net")?);
        let s = Scenario::new(m, p, n).ok_or_else(|| {
            set_error(format!("unknown built-in combination {m}/{p}/{n}"));
            IgStatus::InvalidInput
        })?;
        *out = Box::into_raw(Box::new(IgWave { wave: s.wave }));
        Ok(())
    })
}

/// Builds the space-time described by a TOML scenario configuration.
#[no_mangle]
pub unsafe extern "C" fn ig_wave_from_config(toml: *const c_char, out: *mut *mut IgWave) -> IgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = read_str(toml, "toml")?;
        let wave = ScenarioConfig::parse(text).and_then(|c| c.wave()).map_err(fail)?;
        *out = Box::into_raw(Box::new(IgWave { wave }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ig_wave_free(wave: *mut IgWave) {
    if !wave.is_null() {
        drop(Box::from_raw(wave));
    }
}

/// Dimension of the spatial manifold, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ig_wave_dim(wave: *const IgWave) -> usize {
    wave.as_ref().map_or(0, |w| w.wave.dim())
}

/// Integrates from `u = -1` to `u_end`; `x0` and `xdot0` have `ig_wave_dim`
/// entries. `tol <= 0` selects the default tolerance.
#[no_mangle]
pub unsafe extern "C" fn ig_integrate(
    wave: *const IgWave,
    eps: f64,
    x0: *const f64,
    xdot0: *const f64,
    v0: f64,
    vdot0: f64,
    u_end: f64,
    tol: f64,
    out: *mut *mut IgPath,
) -> IgStatus {
    guard(|| {
        let w = wave_ref(wave)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let n = w.wave.dim();
        let data = InitialData::new(read_vec(x0, n, "x0")?, read_vec(xdot0, n, "xdot0")?, v0, vdot0);
        let mut opts = IntegrationOptions::default();
        if tol > 0.0 {
            opts.tol = tol;
        }
        let path = integrate_impulsive_geodesic(&w.wave, eps, &data, u_end, &opts).map_err(fail)?;
        *out = Box::into_raw(Box::new(IgPath { path }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ig_path_free(path: *mut IgPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// State at `u`; any output pointer may be null. `x` and `xdot` receive
/// `ig_wave_dim` entries.
#[no_mangle]
pub unsafe extern "C" fn ig_path_state_at(
    path: *const IgPath,
    u: f64,
    x: *mut f64,
    xdot: *mut f64,
    v: *mut f64,
    vdot: *mut f64,
) -> IgStatus {
    guard(|| {
        let p = path.as_ref().ok_or_else(|| null("path"))?;
        let s = p.path.state_at(u).ok_or_else(|| {
            set_error(format!("u = {u} outside [{}, {}]", p.path.u_start(), p.path.u_end()));
            IgStatus::OutOfRange
        })?;
        if !x.is_null() {
            ptr::copy_nonoverlapping(s.x.as_ptr(), x, s.x.len());
        }
        if !xdot.is_null() {
            ptr::copy_nonoverlapping(s.xdot.as_ptr(), xdot, s.xdot.len());
        }
        if !v.is_null() {
            *v = s.v;
        }
        if !vdot.is_null() {
            *vdot = s.vdot;
        }
        Ok(())
    })
}

/// Largest relative drift of `g(γ', γ')` along the path.
#[no_mangle]
pub unsafe extern "C" fn ig_path_energy_drift(path: *const IgPath, out: *mut f64) -> IgStatus {
    guard(|| {
        let p = path.as_ref().ok_or_else(|| null("path"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = p.path.diagnostics().relative_energy_drift();
        Ok(())
    })
}

/// Existence certificate for data at `u = -1`. With `eps > 0` the
/// certificate is centred on the entry state at `u = -eps`; with `eps <= 0`
/// a self-consistent `eps` is searched for.
#[no_mangle]
pub unsafe extern "C" fn ig_certify(
    wave: *const IgWave,
    x0: *const f64,
    xdot0: *const f64,
    eps: f64,
    b: f64,
    c: f64,
    out: *mut IgCertificate,
) -> IgStatus {
    guard(|| {
        let w = wave_ref(wave)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let n = w.wave.dim();
        let (x, xd) = (read_vec(x0, n, "x0")?, read_vec(xdot0, n, "xdot0")?);
        let opts = CertifyOptions {
            b,
            c,
            ..CertifyOptions::default()
        };
        let cert = if eps > 0.0 {
            certify_at(&w.wave, &x, &xd, eps, &opts)
        } else {
            certify_auto(&w.wave, &x, &xd, &opts)
        }
        .map_err(fail)?;
        *out = IgCertificate::from(&cert);
        Ok(())
    })
}

/// Jump and kink coefficients of the limit `v` at the shock.
#[no_mangle]
pub unsafe extern "C" fn ig_limit_coefficients(
    wave: *const IgWave,
    x0: *const f64,
    xdot0: *const f64,
    jump: *mut f64,
    kink: *mut f64,
) -> IgStatus {
    guard(|| {
        let w = wave_ref(wave)?;
        if jump.is_null() || kink.is_null() {
            return Err(null("jump/kink"));
        }
        let n = w.wave.dim();
        let data = InitialData::new(read_vec(x0, n, "x0")?, read_vec(xdot0, n, "xdot0")?, 0.0, 0.0);
        let lg = limit_geodesic(&*w.wave.manifold, &*w.wave.profile, &data, 1.0, &IntegrationOptions::default())
            .map_err(fail)?;
        *jump = lg.jump_coeff;
        *kink = lg.kink_coeff;
        Ok(())
    })
}

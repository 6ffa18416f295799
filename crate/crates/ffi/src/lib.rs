//! C interface to `tqb-core`.
//!
//! A simulation is an opaque `TqbSimulation *` made from a preset model name
//! and optional overrides. Functions return a status code; on anything other
//! than `TQB_OK` the message is available from `tqb_last_error` on the same
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tqb_core::problem::{preset, Model, Params};
use tqb_core::stepper::Simulation;
use tqb_core::Error;

pub const TQB_OK: i32 = 0;
/// A required pointer argument was null.
pub const TQB_ERR_NULL: i32 = 1;
/// Unknown model or parameter, bad value, or invalid string.
pub const TQB_ERR_CONFIG: i32 = 2;
/// Singular system or non-finite solution during a step.
pub const TQB_ERR_NUMERIC: i32 = 3;
/// Output buffers shorter than `tqb_simulation_knot_count`.
pub const TQB_ERR_BUFFER: i32 = 4;
/// Internal panic; the handle should be freed.
pub const TQB_ERR_PANIC: i32 = 5;

/// Opaque simulation handle.
pub struct TqbSimulation {
    sim: Simulation,
    dt: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn status_of(e: &Error) -> i32 {
    match e {
        Error::Singular { .. } | Error::Step { .. } => TQB_ERR_NUMERIC,
        _ => TQB_ERR_CONFIG,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (i32, String)>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TQB_OK
        }
        Ok(Err((code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            TQB_ERR_PANIC
        }
    }
}

fn lib_err(e: Error) -> (i32, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (i32, String) {
    (TQB_ERR_NULL, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (i32, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (TQB_ERR_CONFIG, format!("{what} is not UTF-8")))
}

/// Creates a simulation of a preset model.
///
/// `model` is one of `linear`, `brusselator`, `schnakenberg`, `gray-scott`.
/// `keys[i] = values[i]` for `i < n_overrides` replace model constants or
/// `n`, `dt`, `t_end`; `keys` and `values` may be null when `n_overrides` is 0.
/// On success `*out` receives a handle to release with `tqb_simulation_free`.
///
/// # Safety
/// `model` and each key must be NUL-terminated strings; `keys` and `values`
/// must point to `n_overrides` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tqb_simulation_new(
    model: *const c_char,
    keys: *const *const c_char,
    values: *const f64,
    n_overrides: usize,
    out: *mut *mut TqbSimulation,
) -> i32 {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let name = read_str(model, "model")?;
        let model: Model = name.parse().map_err(lib_err)?;
        let mut params = Params::new();
        if n_overrides > 0 {
            if keys.is_null() {
                return Err(null("keys"));
            }
            if values.is_null() {
                return Err(null("values"));
            }
            for i in 0..n_overrides {
                let k = read_str(*keys.add(i), "override key")?;
                params.insert(k.to_string(), *values.add(i));
            }
        }
        let p = preset(model, &params).map_err(lib_err)?;
        let sim = Simulation::new(p.setup).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(TqbSimulation {
            sim,
            dt: p.solver.dt,
        }));
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `sim` must come from `tqb_simulation_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tqb_simulation_free(sim: *mut TqbSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Takes one step of length `dt`.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tqb_simulation_step(sim: *mut TqbSimulation, dt: f64) -> i32 {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        s.sim.step(dt).map_err(lib_err)
    })
}

/// Advances to time `t` with the preset step, the last step shortened to
/// land on `t`. Times not ahead of the current one are a no-op.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tqb_simulation_advance_to(sim: *mut TqbSimulation, t: f64) -> i32 {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        s.sim.advance_to(t, s.dt).map_err(lib_err)
    })
}

/// Current time, or NaN for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tqb_simulation_time(sim: *const TqbSimulation) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.sim.time())
}

/// Preset time step, or NaN for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tqb_simulation_dt(sim: *const TqbSimulation) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.dt)
}

/// Number of mesh knots (intervals + 1), or 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tqb_simulation_knot_count(sim: *const TqbSimulation) -> usize {
    sim.as_ref()
        .map_or(0, |s| s.sim.setup().mesh.intervals() + 1)
}

/// Copies knot positions and nodal U, V into caller buffers of length `len`.
/// Any of `x`, `u`, `v` may be null to skip it.
///
/// # Safety
/// `sim` must be a live handle; non-null buffers must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tqb_simulation_nodal(
    sim: *const TqbSimulation,
    x: *mut f64,
    u: *mut f64,
    v: *mut f64,
    len: usize,
) -> i32 {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        let count = s.sim.setup().mesh.intervals() + 1;
        if len < count {
            return Err((TQB_ERR_BUFFER, format!("need {count} entries, got {len}")));
        }
        let snap = s.sim.nodal();
        let knots = s.sim.setup().mesh.knots();
        for (dst, src) in [(x, &knots), (u, &snap.u), (v, &snap.v)] {
            if !dst.is_null() {
                ptr::copy_nonoverlapping(src.as_ptr(), dst, count);
            }
        }
        Ok(())
    })
}

/// Spline values of U and V at an arbitrary `x` in the domain.
///
/// # Safety
/// `sim` must be a live handle; `u` and `v` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tqb_simulation_evaluate(
    sim: *const TqbSimulation,
    x: f64,
    u: *mut f64,
    v: *mut f64,
) -> i32 {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        if u.is_null() || v.is_null() {
            return Err(null("output"));
        }
        let mesh = &s.sim.setup().mesh;
        if !(x >= mesh.x0() && x <= mesh.x_end()) {
            return Err((TQB_ERR_CONFIG, format!("x = {x} is outside the domain")));
        }
        let (a, b) = s.sim.evaluate(x).map_err(lib_err)?;
        *u = a;
        *v = b;
        Ok(())
    })
}

/// Message of the last failed call on this thread, empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn tqb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn tqb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

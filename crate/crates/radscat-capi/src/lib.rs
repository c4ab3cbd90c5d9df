//! C ABI for the radscat solver.
//!
//! Conventions: handles are opaque pointers owned by the caller and released
//! with the matching `_free` function (`_free(NULL)` is a no-op). Functions
//! that can fail return [`RadscatStatus`] and leave results in out-pointers,
//! which are written only on `RADSCAT_STATUS_OK`. On failure a thread-local
//! message is set, readable via [`radscat_last_error`]. Panics never unwind
//! across the boundary; they are caught and reported as `PANIC`.
//!
//! The committed header `include/radscat.h` is regenerated by the build
//! script whenever this file changes.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use radscat::incident::{gaussian_beam, plane_wave, point_source};
use radscat::potential::{
    constant_disk, eaton_lens, from_table, gaussian_bump, luneburg_lens, random_discontinuous,
    zero, RadialPotential,
};
use radscat::solver::{solve_scattering, SolverState};
use radscat::{C64, Error};

/// Result code of a fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RadscatStatus {
    /// Success; out-pointers hold results.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// Arguments were rejected before any numerics ran.
    InvalidArgument = 2,
    /// The solver failed; see radscat_last_error().
    SolveFailed = 3,
    /// An internal invariant broke; the handle state is still valid.
    Panic = 4,
}

/// Which field a solver evaluation returns.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RadscatField {
    /// Scattered field only.
    Scattered = 0,
    /// Incident plus scattered.
    Total = 1,
    /// Incident field only.
    Incident = 2,
}

/// A compactly supported radially symmetric medium (opaque).
pub struct RadscatPotential(RadialPotential);

/// A completed time-harmonic solve, ready for field evaluation (opaque).
pub struct RadscatSolver(SolverState);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> RadscatStatus {
    match err {
        Error::InvalidConfig(_) | Error::SourceInsideSupport { .. } => {
            RadscatStatus::InvalidArgument
        }
        _ => RadscatStatus::SolveFailed,
    }
}

/// Run `f` with panics converted to a status code.
fn guarded(f: impl FnOnce() -> RadscatStatus) -> RadscatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal panic: {msg}"));
            RadscatStatus::Panic
        }
    }
}

/// Store `q` behind `out` and report success.
///
/// # Safety
/// `out` must be valid for a single pointer write.
unsafe fn emit_potential(out: *mut *mut RadscatPotential, q: RadialPotential) -> RadscatStatus {
    if out.is_null() {
        set_error("out pointer is NULL");
        return RadscatStatus::NullPointer;
    }
    *out = Box::into_raw(Box::new(RadscatPotential(q)));
    RadscatStatus::Ok
}

/// Message from the most recent failure on this thread. The pointer stays
/// valid until the next failing radscat call on the same thread; never free
/// it.
#[no_mangle]
pub extern "C" fn radscat_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string; never free it.
#[no_mangle]
pub extern "C" fn radscat_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Smooth bump `exp(-r^2) - exp(-b^2)` truncated at `b = 2 pi`.
///
/// # Safety
/// `out` must be valid for a single pointer write.
#[no_mangle]
pub unsafe extern "C" fn radscat_potential_gaussian(
    out: *mut *mut RadscatPotential,
) -> RadscatStatus {
    guarded(|| emit_potential(out, gaussian_bump()))
}

/// Luneburg lens profile `1 - r^2/b^2` with `b = 2 pi`.
///
/// # Safety
/// `out` must be valid for a single pointer write.
#[no_mangle]
pub unsafe extern "C" fn radscat_potential_luneburg(
    out: *mut *mut RadscatPotential,
) -> RadscatStatus {
    guarded(|| emit_potential(out, luneburg_lens()))
}

/// Eaton lens profile, regularized near the origin, support `2 pi`.
///
/// # Safety
/// `out` must be valid for a single pointer write.
#[no_mangle]
pub unsafe extern "C" fn radscat_potential_eaton(
    out: *mut *mut RadscatPotential,
) -> RadscatStatus {
    guarded(|| emit_potential(out, eaton_lens()))
}

/// Constant contrast `c` on a disk of radius `b`; requires `1 + c > 0` and
/// `b > 0`.
///
/// # Safety
/// `out` must be valid for a single pointer write.
#[no_mangle]
pub unsafe extern "C" fn radscat_potential_disk(
    contrast: f64,
    radius: f64,
    out: *mut *mut RadscatPotential,
) -> RadscatStatus {
    guarded(|| {
        if !(1.0 + contrast > 0.0) || !(radius > 0.0) {
            set_error("disk needs 1 + contrast > 0 and radius > 0");
            return RadscatStatus::InvalidArgument;
        }
        emit_potential(out, constant_disk(contrast, radius))
    })
}

/// Piecewise-constant 0/1 profile on 20 random annuli, support `2 pi`,
/// deterministic in `seed`.
///
/// # Safety
/// `out` must be valid for a single pointer write.
#[no_mangle]
pub unsafe extern "C" fn radscat_potential_random(
    seed: u64,
    out: *mut *mut RadscatPotential,
) -> RadscatStatus {
    guarded(|| emit_potential(out, random_discontinuous(seed)))
}

/// The trivial medium `q = 0` with nominal support `radius > 0`.
///
/// # Safety
/// `out` must be valid for a single pointer write.
#[no_mangle]
pub unsafe extern "C" fn radscat_potential_zero(
    radius: f64,
    out: *mut *mut RadscatPotential,
) -> RadscatStatus {
    guarded(|| {
        if !(radius > 0.0) {
            set_error("support radius must be positive");
            return RadscatStatus::InvalidArgument;
        }
        emit_potential(out, zero(radius))
    })
}

/// Cubic-spline profile through `len` samples `(radii[i], values[i])`.
/// Radii must increase strictly from 0 to the support radius. The profile is
/// split into independent splines at the `nbreak` sorted interior
/// `breakpoints` (may be NULL when `nbreak` is 0), so jumps are
/// representable.
///
/// # Safety
/// `radii` and `values` must point to `len` doubles, `breakpoints` to
/// `nbreak` doubles, and `out` must be valid for a single pointer write.
#[no_mangle]
pub unsafe extern "C" fn radscat_potential_table(
    radii: *const f64,
    values: *const f64,
    len: usize,
    breakpoints: *const f64,
    nbreak: usize,
    out: *mut *mut RadscatPotential,
) -> RadscatStatus {
    guarded(|| {
        if radii.is_null() || values.is_null() || (breakpoints.is_null() && nbreak > 0) {
            set_error("table arrays must not be NULL");
            return RadscatStatus::NullPointer;
        }
        let radii = std::slice::from_raw_parts(radii, len);
        let values = std::slice::from_raw_parts(values, len);
        let breaks = if nbreak == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(breakpoints, nbreak).to_vec()
        };
        match from_table(radii, values, breaks, "table") {
            Ok(q) => emit_potential(out, q),
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Contrast value `q(r)`; NaN when the handle is NULL.
///
/// # Safety
/// `q` must be a live handle from a `radscat_potential_*` constructor, or
/// NULL.
#[no_mangle]
pub unsafe extern "C" fn radscat_potential_eval(q: *const RadscatPotential, r: f64) -> f64 {
    if q.is_null() {
        return f64::NAN;
    }
    (*q).0.eval(r)
}

/// Support radius `b` (the contrast vanishes for `r >= b`); NaN when the
/// handle is NULL.
///
/// # Safety
/// `q` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn radscat_potential_support_radius(q: *const RadscatPotential) -> f64 {
    if q.is_null() {
        return f64::NAN;
    }
    (*q).0.support_radius()
}

/// Release a potential handle. NULL is ignored.
///
/// # Safety
/// `q` must be NULL or a live handle, not previously freed.
#[no_mangle]
pub unsafe extern "C" fn radscat_potential_free(q: *mut RadscatPotential) {
    if !q.is_null() {
        drop(Box::from_raw(q));
    }
}

unsafe fn solve_common(
    q: *const RadscatPotential,
    source: Result<radscat::incident::IncidentField, Error>,
    eps: f64,
    out: *mut *mut RadscatSolver,
) -> RadscatStatus {
    if q.is_null() || out.is_null() {
        set_error("potential and out pointers must not be NULL");
        return RadscatStatus::NullPointer;
    }
    if !(eps > 1e-15 && eps < 1e-1) {
        set_error("eps must lie in (1e-15, 1e-1)");
        return RadscatStatus::InvalidArgument;
    }
    let source = match source {
        Ok(s) => s,
        Err(e) => {
            set_error(&e.to_string());
            return status_of(&e);
        }
    };
    match solve_scattering(&(*q).0, &source, eps) {
        Ok(state) => {
            *out = Box::into_raw(Box::new(RadscatSolver(state)));
            RadscatStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Solve scattering of the unit plane wave `exp(ik(x cos a + y sin a))`,
/// incidence angle `theta0 = a`, to tolerance `eps`.
///
/// # Safety
/// `q` must be a live potential handle and `out` valid for a single pointer
/// write.
#[no_mangle]
pub unsafe extern "C" fn radscat_solve_plane(
    q: *const RadscatPotential,
    k: f64,
    theta0: f64,
    eps: f64,
    out: *mut *mut RadscatSolver,
) -> RadscatStatus {
    guarded(|| {
        if !(k > 0.0 && k.is_finite()) {
            set_error("wavenumber k must be positive and finite");
            return RadscatStatus::InvalidArgument;
        }
        solve_common(q, Ok(plane_wave(k, theta0)), eps, out)
    })
}

/// Solve scattering of the built-in complex-source Gaussian beam.
///
/// # Safety
/// `q` must be a live potential handle and `out` valid for a single pointer
/// write.
#[no_mangle]
pub unsafe extern "C" fn radscat_solve_beam(
    q: *const RadscatPotential,
    k: f64,
    eps: f64,
    out: *mut *mut RadscatSolver,
) -> RadscatStatus {
    guarded(|| {
        if !(k > 0.0 && k.is_finite()) {
            set_error("wavenumber k must be positive and finite");
            return RadscatStatus::InvalidArgument;
        }
        solve_common(q, Ok(gaussian_beam(k)), eps, out)
    })
}

/// Solve scattering of a point source at `(x0, y0)` with complex amplitude
/// `amp_re + i amp_im`. The source must lie strictly outside the support of
/// the potential.
///
/// # Safety
/// `q` must be a live potential handle and `out` valid for a single pointer
/// write.
#[no_mangle]
pub unsafe extern "C" fn radscat_solve_point(
    q: *const RadscatPotential,
    k: f64,
    x0: f64,
    y0: f64,
    amp_re: f64,
    amp_im: f64,
    eps: f64,
    out: *mut *mut RadscatSolver,
) -> RadscatStatus {
    guarded(|| {
        if q.is_null() {
            set_error("potential handle is NULL");
            return RadscatStatus::NullPointer;
        }
        if !(k > 0.0 && k.is_finite()) {
            set_error("wavenumber k must be positive and finite");
            return RadscatStatus::InvalidArgument;
        }
        let support = (*q).0.support_radius();
        let source = point_source(k, x0, y0, C64::new(amp_re, amp_im), support);
        solve_common(q, source, eps, out)
    })
}

fn field_value(state: &SolverState, which: RadscatField, x: f64, y: f64) -> C64 {
    match which {
        RadscatField::Scattered => state.eval_scattered_point(x, y),
        RadscatField::Total => state.eval_total_point(x, y),
        RadscatField::Incident => state.incident().eval(x, y),
    }
}

/// Evaluate one field value at `(x, y)`; writes the real and imaginary parts.
///
/// # Safety
/// `s` must be a live solver handle; `out_re` and `out_im` must each be valid
/// for a double write.
#[no_mangle]
pub unsafe extern "C" fn radscat_solver_eval(
    s: *const RadscatSolver,
    which: RadscatField,
    x: f64,
    y: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> RadscatStatus {
    guarded(|| {
        if s.is_null() || out_re.is_null() || out_im.is_null() {
            set_error("solver and out pointers must not be NULL");
            return RadscatStatus::NullPointer;
        }
        let v = field_value(&(*s).0, which, x, y);
        *out_re = v.re;
        *out_im = v.im;
        RadscatStatus::Ok
    })
}

/// Evaluate one field at `n` points; fills `out_re[i] + i out_im[i]` for the
/// point `(xs[i], ys[i])`.
///
/// # Safety
/// `s` must be a live solver handle; `xs`, `ys`, `out_re`, `out_im` must each
/// point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn radscat_solver_eval_many(
    s: *const RadscatSolver,
    which: RadscatField,
    xs: *const f64,
    ys: *const f64,
    n: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> RadscatStatus {
    guarded(|| {
        if s.is_null() || (n > 0 && (xs.is_null() || ys.is_null() || out_re.is_null() || out_im.is_null())) {
            set_error("solver and array pointers must not be NULL");
            return RadscatStatus::NullPointer;
        }
        let state = &(*s).0;
        for i in 0..n {
            let v = field_value(state, which, *xs.add(i), *ys.add(i));
            *out_re.add(i) = v.re;
            *out_im.add(i) = v.im;
        }
        RadscatStatus::Ok
    })
}

/// Largest retained angular order; the expansion keeps `|m| <=` this value.
/// Returns 0 when the handle is NULL.
///
/// # Safety
/// `s` must be a live solver handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn radscat_solver_mode_count(s: *const RadscatSolver) -> usize {
    if s.is_null() {
        return 0;
    }
    (*s).0.mode_count()
}

/// Wavenumber the solve was performed at; NaN when the handle is NULL.
///
/// # Safety
/// `s` must be a live solver handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn radscat_solver_k(s: *const RadscatSolver) -> f64 {
    if s.is_null() {
        return f64::NAN;
    }
    (*s).0.k()
}

/// Time-averaged outgoing power flux of the scattered field through the
/// circle of the given radius (must enclose the support). NaN when the
/// handle is NULL.
///
/// # Safety
/// `s` must be a live solver handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn radscat_solver_outgoing_flux(
    s: *const RadscatSolver,
    radius: f64,
) -> f64 {
    if s.is_null() {
        return f64::NAN;
    }
    (*s).0.outgoing_flux(radius)
}

/// Release a solver handle. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a live handle, not previously freed.
#[no_mangle]
pub unsafe extern "C" fn radscat_solver_free(s: *mut RadscatSolver) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

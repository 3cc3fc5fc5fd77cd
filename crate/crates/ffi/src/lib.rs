//! C ABI over `weakkam`.
//!
//! Every function returns a [`WkStatus`]. On failure the message is available
//! from [`wk_last_error`] on the same thread. Handles are opaque, created by
//! `*_create`/`*_compute`-style calls and released with the matching `*_free`;
//! passing a freed or foreign pointer is undefined behaviour. Output pointers
//! must be valid for writes; buffers must hold at least `len` elements.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use weakkam::commutation::{commutation_residual, WeakKamData, WeakKamSettings};
use weakkam::config::RunConfig;
use weakkam::minplus::{self, ActionKernel};
use weakkam::weak_kam::critical_value;
use weakkam::{Error, Pipeline, ScalarField};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// A discretized Hamiltonian with its kernel powers.
pub struct WkPipeline {
    inner: Pipeline,
    settings: WeakKamSettings,
}

pub struct WkKernel {
    inner: ActionKernel,
}

/// Critical value, barrier and Aubry set of one pipeline.
pub struct WkWeakKam {
    inner: WeakKamData,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

type Outcome = Result<(), (WkStatus, String)>;

fn from_core(e: Error) -> (WkStatus, String) {
    let status = if e.is_config() { WkStatus::Config } else { WkStatus::Numerical };
    (status, e.to_string())
}

fn guard(f: impl FnOnce() -> Outcome) -> WkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WkStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside weakkam");
            WkStatus::Panic
        }
    }
}

fn null(what: &str) -> (WkStatus, String) {
    (WkStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (WkStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (WkStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (WkStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn put<T>(out: *mut T, v: T, what: &str) -> Outcome {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn fill(buf: *mut f64, len: usize, src: &[f64]) -> Outcome {
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len < src.len() {
        return Err((WkStatus::BufferTooSmall, format!("buffer holds {len} values, {} needed", src.len())));
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Message of the last failed call on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds the Hamiltonian `name` declared in the TOML document `config`.
#[no_mangle]
pub unsafe extern "C" fn wk_pipeline_create(
    config: *const c_char,
    name: *const c_char,
    out: *mut *mut WkPipeline,
) -> WkStatus {
    guard(|| {
        let cfg = RunConfig::from_toml(text(config, "config")?).map_err(from_core)?;
        let spec = cfg.hamiltonian(text(name, "name")?).map_err(from_core)?;
        let inner = Pipeline::build(spec, cfg.grid, cfg.plan, cfg.resolution).map_err(from_core)?;
        let settings = WeakKamSettings {
            t_max: cfg.plan.t_max,
            tol_c: cfg.tolerances.tol_c,
            cauchy_tol: cfg.tolerances.cauchy_tol,
            epsilon: cfg.tolerances.epsilon_aubry,
        };
        put(out, Box::into_raw(Box::new(WkPipeline { inner, settings })), "out")
    })
}

/// Pipeline of `H(x, -p)` on the same discretization.
#[no_mangle]
pub unsafe extern "C" fn wk_pipeline_reversed(p: *const WkPipeline, out: *mut *mut WkPipeline) -> WkStatus {
    guard(|| {
        let p = deref(p, "pipeline")?;
        let inner = p.inner.reversed().map_err(from_core)?;
        put(out, Box::into_raw(Box::new(WkPipeline { inner, settings: p.settings })), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn wk_pipeline_free(p: *mut WkPipeline) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of torus grid nodes.
#[no_mangle]
pub unsafe extern "C" fn wk_pipeline_nodes(p: *const WkPipeline, out: *mut usize) -> WkStatus {
    guard(|| put(out, deref(p, "pipeline")?.inner.grid().len(), "out"))
}

/// `c = -min_y h^T(y,y) / T` at the configured `t_max`.
#[no_mangle]
pub unsafe extern "C" fn wk_critical_value(p: *const WkPipeline, out: *mut f64) -> WkStatus {
    guard(|| {
        let p = deref(p, "pipeline")?;
        let c = critical_value(p.inner.plan(), p.inner.base(), p.settings.t_max, p.settings.tol_c).map_err(from_core)?;
        put(out, c.c_est, "out")
    })
}

/// Action kernel at time `t`, a positive multiple of the step.
#[no_mangle]
pub unsafe extern "C" fn wk_kernel_at(p: *const WkPipeline, t: f64, out: *mut *mut WkKernel) -> WkStatus {
    guard(|| {
        let inner = deref(p, "pipeline")?.inner.kernel(t).map_err(from_core)?;
        put(out, Box::into_raw(Box::new(WkKernel { inner })), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn wk_kernel_free(k: *mut WkKernel) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// Side length `N` of the `N x N` kernel.
#[no_mangle]
pub unsafe extern "C" fn wk_kernel_size(k: *const WkKernel, out: *mut usize) -> WkStatus {
    guard(|| put(out, deref(k, "kernel")?.inner.grid().len(), "out"))
}

#[no_mangle]
pub unsafe extern "C" fn wk_kernel_time(k: *const WkKernel, out: *mut f64) -> WkStatus {
    guard(|| put(out, deref(k, "kernel")?.inner.time(), "out"))
}

/// Row-major entries `K[y][x]`; `+inf` marks unreachable pairs.
#[no_mangle]
pub unsafe extern "C" fn wk_kernel_entries(k: *const WkKernel, buf: *mut f64, len: usize) -> WkStatus {
    guard(|| fill(buf, len, deref(k, "kernel")?.inner.matrix().data()))
}

/// Min-plus product `a ⊗ b` (first `a`, then `b`).
#[no_mangle]
pub unsafe extern "C" fn wk_kernel_compose(a: *const WkKernel, b: *const WkKernel, out: *mut *mut WkKernel) -> WkStatus {
    guard(|| {
        let inner = minplus::compose(&deref(a, "a")?.inner, &deref(b, "b")?.inner).map_err(from_core)?;
        put(out, Box::into_raw(Box::new(WkKernel { inner })), "out")
    })
}

/// `v(x) = min_y u(y) + K(y,x)`; `u` and `v` hold `len = N` values.
#[no_mangle]
pub unsafe extern "C" fn wk_kernel_apply(k: *const WkKernel, u: *const f64, len: usize, v: *mut f64) -> WkStatus {
    guard(|| {
        let k = &deref(k, "kernel")?.inner;
        if u.is_null() {
            return Err(null("u"));
        }
        if len != k.grid().len() {
            return Err((WkStatus::InvalidArgument, format!("field has {len} values, grid has {}", k.grid().len())));
        }
        let field = ScalarField::new(*k.grid(), std::slice::from_raw_parts(u, len).to_vec()).map_err(from_core)?;
        let moved = minplus::apply(&field, k).map_err(from_core)?;
        fill(v, len, moved.values())
    })
}

/// Critical value, barrier and Aubry set with the configured tolerances.
#[no_mangle]
pub unsafe extern "C" fn wk_weakkam_compute(p: *const WkPipeline, out: *mut *mut WkWeakKam) -> WkStatus {
    guard(|| {
        let p = deref(p, "pipeline")?;
        let inner = WeakKamData::compute(&p.inner, &p.settings).map_err(from_core)?;
        put(out, Box::into_raw(Box::new(WkWeakKam { inner })), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn wk_weakkam_free(w: *mut WkWeakKam) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

#[no_mangle]
pub unsafe extern "C" fn wk_weakkam_critical_value(w: *const WkWeakKam, out: *mut f64) -> WkStatus {
    guard(|| put(out, deref(w, "weakkam")?.inner.critical.c_est, "out"))
}

/// Nonzero when the barrier sequence met the Cauchy tolerance.
#[no_mangle]
pub unsafe extern "C" fn wk_weakkam_barrier_converged(w: *const WkWeakKam, out: *mut i32) -> WkStatus {
    guard(|| put(out, deref(w, "weakkam")?.inner.barrier.converged as i32, "out"))
}

/// Row-major barrier `h[y][x]`, `N * N` values.
#[no_mangle]
pub unsafe extern "C" fn wk_weakkam_barrier(w: *const WkWeakKam, buf: *mut f64, len: usize) -> WkStatus {
    guard(|| fill(buf, len, deref(w, "weakkam")?.inner.barrier.entries().data()))
}

/// Aubry set node indices in increasing order. `count` always receives the
/// set size; `WK_STATUS_BUFFER_TOO_SMALL` is returned when `cap < count`.
#[no_mangle]
pub unsafe extern "C" fn wk_weakkam_aubry(
    w: *const WkWeakKam,
    buf: *mut usize,
    cap: usize,
    count: *mut usize,
) -> WkStatus {
    guard(|| {
        let members = &deref(w, "weakkam")?.inner.aubry.members;
        put(count, members.len(), "count")?;
        if members.is_empty() {
            return Ok(());
        }
        if cap < members.len() {
            return Err((WkStatus::BufferTooSmall, format!("buffer holds {cap} indices, {} needed", members.len())));
        }
        if buf.is_null() {
            return Err(null("buffer"));
        }
        std::ptr::copy_nonoverlapping(members.as_ptr(), buf, members.len());
        Ok(())
    })
}

/// `sup |K_H^t ⊗ K_G^s - K_G^s ⊗ K_H^t|` for two pipelines on the same grid and step.
#[no_mangle]
pub unsafe extern "C" fn wk_commutation_residual(
    h: *const WkPipeline,
    g: *const WkPipeline,
    t: f64,
    s: f64,
    out: *mut f64,
) -> WkStatus {
    guard(|| {
        let r = commutation_residual(&deref(h, "h")?.inner, &deref(g, "g")?.inner, &[(t, s)]).map_err(from_core)?;
        put(out, r[0].residual, "out")
    })
}

//! C ABI over the crossover library. Objects are opaque handles created by `*_new` and released by
//! `*_free`; every fallible call returns a [`CrossoverStatus`] and leaves a message retrievable with
//! [`crossover_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use crossover::error::Error;
use crossover::flow::{default_window, FlowParams, GbarSequence};
use crossover::kernels::KernelSet;
use crossover::models::oracle::{hyper_2f1, infrared_mass, orbit_function};
use crossover::models::{null_model, PolyToyModel, RgModel, ToyParams};
use crossover::seqspace::{recursion_residual, solve_fixed_point, DeviationSequence, NormWeights, SolverConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossoverStatus {
    Ok = 0,
    NullPointer = 1,
    Usage = 2,
    Domain = 3,
    Numerical = 4,
    Precondition = 5,
    Truncation = 6,
    Divergence = 7,
    DomainViolation = 8,
    Model = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossoverModel {
    Null = 0,
    Toy = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CrossoverStatus {
    match e {
        Error::Domain(_) => CrossoverStatus::Domain,
        Error::Numerical(_) => CrossoverStatus::Numerical,
        Error::Usage(_) => CrossoverStatus::Usage,
        Error::Precondition { .. } => CrossoverStatus::Precondition,
        Error::Truncation(_) => CrossoverStatus::Truncation,
        Error::Divergence { .. } => CrossoverStatus::Divergence,
        Error::DomainViolation { .. } => CrossoverStatus::DomainViolation,
        Error::Model(_) => CrossoverStatus::Model,
    }
}

fn fail(status: CrossoverStatus, msg: impl Into<String>) -> CrossoverStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), CrossoverStatus>) -> CrossoverStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CrossoverStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(CrossoverStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: crossover::error::Result<T>) -> Result<T, CrossoverStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, CrossoverStatus> {
    // SAFETY: callers of the public functions guarantee that non-null pointers are valid and aligned.
    unsafe { p.as_mut() }.ok_or_else(|| fail(CrossoverStatus::NullPointer, "null output pointer"))
}

fn handle<'a, T>(p: *const T) -> Result<&'a T, CrossoverStatus> {
    // SAFETY: non-null handles come from the matching constructor and have not been freed.
    unsafe { p.as_ref() }.ok_or_else(|| fail(CrossoverStatus::NullPointer, "null handle"))
}

fn copy_out(src: &[f64], dst: *mut f64, len: usize) -> Result<(), CrossoverStatus> {
    if dst.is_null() {
        return Err(fail(CrossoverStatus::NullPointer, "null buffer"));
    }
    if len < src.len() {
        return Err(fail(CrossoverStatus::BufferTooSmall, format!("buffer holds {len}, need {}", src.len())));
    }
    // SAFETY: dst is valid for len >= src.len() writes per the caller contract.
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len()) };
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the next call on the thread.
#[no_mangle]
pub extern "C" fn crossover_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Kernel coefficients and covariance evaluators at fixed (L, eps).
pub struct CrossoverKernels(KernelSet);

/// Builds the kernels at (l, eps).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn crossover_kernels_new(l: u32, eps: f64, out: *mut *mut CrossoverKernels) -> CrossoverStatus {
    guard(|| {
        let out = out_ref(out)?;
        let ks = lift(KernelSet::new(l, eps))?;
        *out = Box::into_raw(Box::new(CrossoverKernels(ks)));
        Ok(())
    })
}

/// Releases a kernel handle; null is ignored.
///
/// # Safety
/// `h` must be null or a handle from [`crossover_kernels_new`] that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn crossover_kernels_free(h: *mut CrossoverKernels) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Writes a, b, C(0) and Gamma(0).
///
/// # Safety
/// `h` must be a live kernel handle; each output pointer must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn crossover_kernels_coefficients(
    h: *const CrossoverKernels,
    a: *mut f64,
    b: *mut f64,
    c0: *mut f64,
    gamma0: *mut f64,
) -> CrossoverStatus {
    guard(|| {
        let row = handle(h)?.0.row();
        *out_ref(a)? = row.a;
        *out_ref(b)? = row.b;
        *out_ref(c0)? = row.c0;
        *out_ref(gamma0)? = row.gamma0;
        Ok(())
    })
}

/// Full covariance at radius r.
///
/// # Safety
/// `h` must be a live kernel handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn crossover_kernels_covariance(h: *const CrossoverKernels, r: f64, out: *mut f64) -> CrossoverStatus {
    guard(|| {
        let v = lift(handle(h)?.0.covariance(r))?;
        *out_ref(out)? = v;
        Ok(())
    })
}

/// Approximate orbit on its default or a user window.
pub struct CrossoverFlow(GbarSequence);

fn flow_params(l: u32, eps: f64, a: f64) -> Result<FlowParams, CrossoverStatus> {
    let a = if a.is_nan() { lift(KernelSet::new(l, eps))?.a_coeff } else { a };
    lift(FlowParams::new(l, eps, a))
}

fn window(fp: &FlowParams, n: i64) -> usize {
    if n < 0 {
        default_window(fp)
    } else {
        n as usize
    }
}

/// Builds gbar_n for n in [-n_minus, n_plus]. A NaN `a` takes the kernel coefficient; a negative
/// window length takes the default window.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn crossover_flow_new(
    l: u32,
    eps: f64,
    a: f64,
    omega0: f64,
    n_minus: i64,
    n_plus: i64,
    out: *mut *mut CrossoverFlow,
) -> CrossoverStatus {
    guard(|| {
        let out = out_ref(out)?;
        let fp = flow_params(l, eps, a)?;
        let gs = lift(GbarSequence::build(omega0, window(&fp, n_minus), window(&fp, n_plus), &fp))?;
        *out = Box::into_raw(Box::new(CrossoverFlow(gs)));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from [`crossover_flow_new`] that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn crossover_flow_free(h: *mut CrossoverFlow) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Writes the first index and the number of entries.
///
/// # Safety
/// `h` must be a live flow handle; outputs must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn crossover_flow_window(h: *const CrossoverFlow, lo: *mut i64, len: *mut usize) -> CrossoverStatus {
    guard(|| {
        let gs = &handle(h)?.0;
        *out_ref(lo)? = gs.lo();
        *out_ref(len)? = gs.values().len();
        Ok(())
    })
}

/// Copies gbar_n, from the first index on, into `buf`.
///
/// # Safety
/// `h` must be a live flow handle; `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn crossover_flow_values(h: *const CrossoverFlow, buf: *mut f64, len: usize) -> CrossoverStatus {
    guard(|| copy_out(handle(h)?.0.values(), buf, len))
}

/// A solved trajectory.
pub struct CrossoverOrbit {
    lo: i64,
    gbar: Vec<f64>,
    g: Vec<f64>,
    mu: Vec<f64>,
    residual: f64,
    iterations: usize,
}

/// Solves the full trajectory with the chosen model on the default window. A NaN `a` takes the
/// kernel coefficient. `model` is a [`CrossoverModel`] value; the toy model uses its calibrated
/// coefficients.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn crossover_orbit_solve(
    l: u32,
    eps: f64,
    a: f64,
    omega0: f64,
    model: u32,
    out: *mut *mut CrossoverOrbit,
) -> CrossoverStatus {
    guard(|| {
        let out = out_ref(out)?;
        let fp = flow_params(l, eps, a)?;
        let cfg = SolverConfig::for_omega0(omega0);
        let m: Box<dyn RgModel> = match model {
            x if x == CrossoverModel::Null as u32 => Box::new(null_model()),
            x if x == CrossoverModel::Toy as u32 => {
                Box::new(lift(PolyToyModel::new(ToyParams::calibrated(&fp, cfg.beta / 12.0), &fp, None))?)
            }
            x => return Err(fail(CrossoverStatus::Usage, format!("unknown model {x}"))),
        };
        let gs = lift(GbarSequence::build_default(omega0, &fp))?;
        let nw = NormWeights::standard(&fp);
        let init = DeviationSequence::zeros_like(&gs, m.r_dim());
        let (ds, rep) = lift(solve_fixed_point(&init, &cfg, &gs, &nw, m.as_ref()))?;
        let residual = lift(recursion_residual(&ds, &gs, &nw, m.as_ref()))?;
        let orbit = CrossoverOrbit {
            lo: gs.lo(),
            gbar: gs.values().to_vec(),
            g: gs.indices().map(|n| gs.get(n) + ds.dg_at(n)).collect(),
            mu: gs.indices().map(|n| ds.mu_at(n)).collect(),
            residual,
            iterations: rep.iterations,
        };
        *out = Box::into_raw(Box::new(orbit));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from [`crossover_orbit_solve`] that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn crossover_orbit_free(h: *mut CrossoverOrbit) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Writes the first index, the number of entries, the weighted recursion residual and the
/// number of solver iterations. Any output pointer may be null.
///
/// # Safety
/// `h` must be a live orbit handle; non-null outputs must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn crossover_orbit_info(
    h: *const CrossoverOrbit,
    lo: *mut i64,
    len: *mut usize,
    residual: *mut f64,
    iterations: *mut usize,
) -> CrossoverStatus {
    guard(|| {
        let o = handle(h)?;
        if let Some(p) = lo.as_mut() {
            *p = o.lo;
        }
        if let Some(p) = len.as_mut() {
            *p = o.g.len();
        }
        if let Some(p) = residual.as_mut() {
            *p = o.residual;
        }
        if let Some(p) = iterations.as_mut() {
            *p = o.iterations;
        }
        Ok(())
    })
}

/// Copies gbar_n, g_n and mu_n; each buffer must hold the orbit length.
///
/// # Safety
/// `h` must be a live orbit handle; each buffer must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn crossover_orbit_values(
    h: *const CrossoverOrbit,
    gbar: *mut f64,
    g: *mut f64,
    mu: *mut f64,
    len: usize,
) -> CrossoverStatus {
    guard(|| {
        let o = handle(h)?;
        copy_out(&o.gbar, gbar, len)?;
        copy_out(&o.g, g, len)?;
        copy_out(&o.mu, mu, len)
    })
}

/// Gauss hypergeometric function 2F1(a, b; c; s) for |s| < 1.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn crossover_hyp2f1(a: f64, b: f64, c: f64, s: f64, out: *mut f64) -> CrossoverStatus {
    guard(|| {
        let v = lift(hyper_2f1(a, b, c, s))?;
        *out_ref(out)? = v;
        Ok(())
    })
}

/// Exact two-coupling orbit in units of the mass scale at coupling fraction s, for exponent nu.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn crossover_orbit_mass(s: f64, nu: f64, out: *mut f64) -> CrossoverStatus {
    guard(|| {
        let v = if s > 0.5 { lift(infrared_mass(s, nu))? } else { lift(orbit_function(s, nu))? / (1.0 - s).powf(nu) };
        *out_ref(out)? = v;
        Ok(())
    })
}

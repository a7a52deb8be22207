//! C ABI over the optexec solver: opaque handles, status codes, and a
//! thread-local last-error message. Every function is panic-safe; a caught
//! panic reports `OPTEXEC_STATUS_PANIC` instead of unwinding across the
//! boundary. The matching header lives in `include/optexec.h` and is kept in
//! sync by the build script (the `header_matches_the_committed_copy` test
//! fails on drift).

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use optexec::coeff::Coefficient;
use optexec::cost;
use optexec::grid::TimeGrid;
use optexec::model::{ModelSpec, RunningTarget, TargetSpec, TerminalTarget};
use optexec::path::Simulator;
use optexec::solver::{self, OptimalLaw};
use optexec::{Error, Result};

/// Result of every fallible call. Zero is success; anything else is an error
/// and `optexec_last_error` holds a message describing it.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptexecStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Parameters are malformed or inconsistent.
    Config = 2,
    /// The request is well formed but outside the implemented scope.
    Unsupported = 3,
    /// Inputs outside the mathematical domain of the operation.
    Domain = 4,
    /// The backward sweep lost positivity or produced a non-finite value.
    Solver = 5,
    Io = 6,
    /// An internal panic was caught at the boundary.
    Panic = 7,
    /// An output buffer is shorter than the data; nothing was written.
    BufferTooSmall = 8,
}

/// Model with constant coefficients and constant targets. Time runs over
/// `[0, horizon]` on a uniform grid of `n_steps` steps.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OptexecModelParams {
    /// Initial impact level, must be positive.
    pub gamma0: f64,
    /// Impact drift rate.
    pub mu: f64,
    /// Impact volatility.
    pub sigma: f64,
    /// Resilience rate, must be nonnegative.
    pub rho: f64,
    /// Resilience volatility.
    pub eta: f64,
    /// Correlation between impact and resilience noise, in [-1, 1].
    pub rbar: f64,
    /// Running-target penalty weight, must be nonnegative.
    pub lambda: f64,
    /// Position immediately before time zero.
    pub x0: f64,
    /// Price deviation immediately before time zero.
    pub d0: f64,
    /// Trading horizon, must be positive.
    pub horizon: f64,
    /// Terminal position target.
    pub xi: f64,
    /// Running position target (only priced when lambda > 0).
    pub zeta: f64,
    /// Number of grid steps, must be positive.
    pub n_steps: usize,
}

/// Solved optimal execution law. Opaque: create with `optexec_law_new`,
/// release with `optexec_law_free`.
pub struct OptexecLaw {
    law: OptimalLaw,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut e = e.borrow_mut();
        e.clear();
        e.push_str(msg);
    });
}

fn fail(err: &Error) -> OptexecStatus {
    set_error(&err.to_string());
    match err {
        Error::Config(_) => OptexecStatus::Config,
        Error::Unsupported(_) => OptexecStatus::Unsupported,
        Error::Domain(_) => OptexecStatus::Domain,
        Error::Solver { .. } => OptexecStatus::Solver,
        Error::Io(_) => OptexecStatus::Io,
    }
}

fn guarded(f: impl FnOnce() -> OptexecStatus) -> OptexecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(&format!("internal panic: {msg}"));
            OptexecStatus::Panic
        }
    }
}

fn null_pointer(what: &str) -> OptexecStatus {
    set_error(&format!("{what} must not be null"));
    OptexecStatus::NullPointer
}

fn build_spec(p: &OptexecModelParams) -> Result<ModelSpec> {
    let grid = TimeGrid::new(0.0, p.horizon, p.n_steps)?;
    let running = if p.zeta == 0.0 {
        RunningTarget::Zero
    } else {
        RunningTarget::Deterministic(Coefficient::constant(p.zeta))
    };
    ModelSpec::with_constants(
        grid,
        p.gamma0,
        p.mu,
        p.sigma,
        p.rho,
        p.eta,
        p.rbar,
        p.lambda,
        TargetSpec {
            terminal: TerminalTarget::Const(p.xi),
            running,
        },
        p.x0,
        p.d0,
    )
}

/// Solves the model described by `params` and stores a handle in `*out`.
///
/// # Safety
/// `params` must point to a valid `OptexecModelParams` and `out` to writable
/// pointer storage. On success `*out` owns the law and must be released with
/// `optexec_law_free`; on failure `*out` is set to null.
#[no_mangle]
pub unsafe extern "C" fn optexec_law_new(
    params: *const OptexecModelParams,
    out: *mut *mut OptexecLaw,
) -> OptexecStatus {
    guarded(|| {
        if params.is_null() {
            return null_pointer("params");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        unsafe { *out = std::ptr::null_mut() };
        let p = unsafe { *params };
        match build_spec(&p).and_then(|spec| solver::solve(&spec)) {
            Ok(law) => {
                unsafe { *out = Box::into_raw(Box::new(OptexecLaw { law })) };
                OptexecStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Releases a law handle. Null is a no-op.
///
/// # Safety
/// `law` must be null or a pointer returned by `optexec_law_new` that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn optexec_law_free(law: *mut OptexecLaw) {
    if !law.is_null() {
        drop(unsafe { Box::from_raw(law) });
    }
}

/// Writes the number of grid nodes (steps + 1) to `*out`. This is the buffer
/// length the gain accessors require.
///
/// # Safety
/// `law` must be a live handle from `optexec_law_new`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn optexec_law_n_nodes(
    law: *const OptexecLaw,
    out: *mut usize,
) -> OptexecStatus {
    guarded(|| {
        if law.is_null() {
            return null_pointer("law");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let handle = unsafe { &*law };
        unsafe { *out = handle.law.riccati().k().len() };
        OptexecStatus::Ok
    })
}

fn copy_nodes(values: &[f64], buf: *mut f64, len: usize) -> OptexecStatus {
    if buf.is_null() {
        return null_pointer("buf");
    }
    if len < values.len() {
        set_error(&format!("buffer holds {len} values, need {}", values.len()));
        return OptexecStatus::BufferTooSmall;
    }
    unsafe { std::ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len()) };
    OptexecStatus::Ok
}

/// Copies the quadratic value gain at every grid node into `buf`.
///
/// # Safety
/// `law` must be a live handle; `buf` must point to at least `len` writable
/// doubles, with `len` at least the node count from `optexec_law_n_nodes`.
#[no_mangle]
pub unsafe extern "C" fn optexec_law_value_gain(
    law: *const OptexecLaw,
    buf: *mut f64,
    len: usize,
) -> OptexecStatus {
    guarded(|| {
        if law.is_null() {
            return null_pointer("law");
        }
        let handle = unsafe { &*law };
        copy_nodes(handle.law.riccati().k(), buf, len)
    })
}

/// Copies the feedback gain (the coefficient multiplying the hidden deviation
/// in the optimal trading rate) at every grid node into `buf`.
///
/// # Safety
/// Same contract as `optexec_law_value_gain`.
#[no_mangle]
pub unsafe extern "C" fn optexec_law_feedback_gain(
    law: *const OptexecLaw,
    buf: *mut f64,
    len: usize,
) -> OptexecStatus {
    guarded(|| {
        if law.is_null() {
            return null_pointer("law");
        }
        let handle = unsafe { &*law };
        copy_nodes(handle.law.riccati().theta(), buf, len)
    })
}

/// Evaluates the optimal expected cost through the solved value function,
/// averaging the path-dependent part over `n_paths` Monte-Carlo paths drawn
/// from `seed`. Deterministic models report a zero standard error.
///
/// # Safety
/// `law` must be a live handle; `mean` and `std_error` must be writable.
#[no_mangle]
pub unsafe extern "C" fn optexec_law_expected_cost(
    law: *const OptexecLaw,
    seed: u64,
    n_paths: u64,
    mean: *mut f64,
    std_error: *mut f64,
) -> OptexecStatus {
    guarded(|| {
        if law.is_null() {
            return null_pointer("law");
        }
        if mean.is_null() {
            return null_pointer("mean");
        }
        if std_error.is_null() {
            return null_pointer("std_error");
        }
        if n_paths == 0 {
            set_error("n_paths must be positive");
            return OptexecStatus::Config;
        }
        let handle = unsafe { &*law };
        let sim = match Simulator::new(handle.law.spec().clone(), seed) {
            Ok(sim) => sim,
            Err(err) => return fail(&err),
        };
        match handle.law.formula_cost(&sim, n_paths) {
            Ok(est) => {
                unsafe {
                    *mean = est.mean;
                    *std_error = est.std_error;
                }
                OptexecStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Simulates the optimal strategy on `n_paths` paths drawn from `seed` and
/// reports the Monte-Carlo mean cost and its standard error. Agrees with
/// `optexec_law_expected_cost` up to sampling noise and O(dt) discretization.
///
/// # Safety
/// Same contract as `optexec_law_expected_cost`.
#[no_mangle]
pub unsafe extern "C" fn optexec_law_simulated_cost(
    law: *const OptexecLaw,
    seed: u64,
    n_paths: u64,
    mean: *mut f64,
    std_error: *mut f64,
) -> OptexecStatus {
    guarded(|| {
        if law.is_null() {
            return null_pointer("law");
        }
        if mean.is_null() {
            return null_pointer("mean");
        }
        if std_error.is_null() {
            return null_pointer("std_error");
        }
        if n_paths == 0 {
            set_error("n_paths must be positive");
            return OptexecStatus::Config;
        }
        let handle = unsafe { &*law };
        let sim = match Simulator::new(handle.law.spec().clone(), seed) {
            Ok(sim) => sim,
            Err(err) => return fail(&err),
        };
        match cost::cost_pm(&handle.law.strategy(), &sim, n_paths) {
            Ok(est) => {
                unsafe {
                    *mean = est.mean;
                    *std_error = est.std_error;
                }
                OptexecStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Principal branch of the Lambert W function, defined for `z >= -1/e`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn optexec_lambert_w0(z: f64, out: *mut f64) -> OptexecStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        match optexec::lambert::lambert_w0(z) {
            Ok(w) => {
                unsafe { *out = w };
                OptexecStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Copies the current thread's last error message into `buf` (truncated,
/// always NUL-terminated when `cap > 0`) and returns the full message length
/// in bytes, excluding the terminator. Call with a null `buf` or `cap == 0`
/// to query the required size.
///
/// # Safety
/// If `buf` is non-null it must point to at least `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn optexec_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Version of the library as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn optexec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

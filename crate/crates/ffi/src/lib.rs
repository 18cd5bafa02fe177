//! C interface to `implicitize`.
//!
//! Every function returns an [`ImpStatus`]; on failure the message is kept
//! per thread and can be read with [`imp_last_error_message`]. Panics never
//! cross the boundary, they surface as [`ImpStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use implicitize::harness::{run_path, RunError, RunOptions};
use implicitize::problems::{cfl_threshold, GridSpec, HeatProblem, MassMode};
use implicitize::{solve_fixed_point, Anderson, AndersonConfig, Error, FixedPointConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    /// The fixed-point solve stopped without converging.
    NotConverged = 4,
    /// The user callback returned a nonzero code.
    CallbackFailed = 5,
    ConfigError = 6,
    IoError = 7,
    Internal = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImpMassMode {
    IdentityFd = 0,
    LumpedFe = 1,
    ConsistentFe = 2,
}

impl From<ImpMassMode> for MassMode {
    fn from(m: ImpMassMode) -> Self {
        match m {
            ImpMassMode::IdentityFd => MassMode::IdentityFd,
            ImpMassMode::LumpedFe => MassMode::LumpedFe,
            ImpMassMode::ConsistentFe => MassMode::ConsistentFe,
        }
    }
}

/// Opaque Anderson accelerator.
pub struct ImpAnderson {
    inner: Anderson,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpSolveOptions {
    pub depth: usize,
    pub damping: f64,
    pub alternation: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iter: usize,
}

/// `out = G(x)` for vectors of length `n`; nonzero return aborts the solve.
pub type ImpMapFn = Option<unsafe extern "C" fn(ctx: *mut c_void, n: usize, x: *const f64, out: *mut f64) -> c_int>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

type Failure = (ImpStatus, String);

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ImpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ImpStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            ImpStatus::Panic
        }
    }
}

fn core_failure(e: Error) -> Failure {
    let status = match e {
        Error::DimensionMismatch { .. } => ImpStatus::DimensionMismatch,
        Error::InvalidArgument(_) => ImpStatus::InvalidArgument,
        Error::FixedPoint(_) => ImpStatus::NotConverged,
        _ => ImpStatus::Internal,
    };
    (status, e.to_string())
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err((ImpStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// Length in bytes of the last error message on this thread, without the
/// terminating NUL; 0 when there is none.
#[no_mangle]
pub extern "C" fn imp_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |c| c.as_bytes().len()))
}

/// Copies the last error message into `buf` (NUL-terminated, truncated to
/// `len - 1` bytes). Returns the number of bytes written without the NUL.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn imp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    if buf.is_null() || len == 0 {
        return 0;
    }
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[][..], |c| c.as_bytes());
        let n = bytes.len().min(len - 1);
        std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
        *buf.add(n) = 0;
        n
    })
}

/// Creates an accelerator with window depth `depth`. `alternation` of 1 mixes
/// on every step.
///
/// # Safety
/// `out` must be a valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn imp_anderson_new(
    depth: usize,
    damping: f64,
    alternation: usize,
    out: *mut *mut ImpAnderson,
) -> ImpStatus {
    guard(|| {
        non_null(out, "out")?;
        let cfg = AndersonConfig {
            depth,
            damping,
            alternation,
            ..AndersonConfig::default()
        };
        let inner = Anderson::new(cfg).map_err(core_failure)?;
        *out = Box::into_raw(Box::new(ImpAnderson { inner }));
        Ok(())
    })
}

/// Writes the next iterate given `u` and `g = G(u)`, all of length `n`.
/// `accelerated` may be null.
///
/// # Safety
/// `handle` must come from [`imp_anderson_new`]; `u`, `g` and `next` must be
/// valid for `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn imp_anderson_step(
    handle: *mut ImpAnderson,
    n: usize,
    u: *const f64,
    g: *const f64,
    next: *mut f64,
    accelerated: *mut bool,
) -> ImpStatus {
    guard(|| {
        non_null(handle, "handle")?;
        non_null(u, "u")?;
        non_null(g, "g")?;
        non_null(next, "next")?;
        let aa = &mut (*handle).inner;
        let u = std::slice::from_raw_parts(u, n);
        let g = std::slice::from_raw_parts(g, n);
        let step = aa.step(u, g).map_err(core_failure)?;
        std::slice::from_raw_parts_mut(next, n).copy_from_slice(&step.next);
        if !accelerated.is_null() {
            *accelerated = step.accelerated;
        }
        Ok(())
    })
}

/// Empties the window; the configuration is kept.
///
/// # Safety
/// `handle` must come from [`imp_anderson_new`].
#[no_mangle]
pub unsafe extern "C" fn imp_anderson_reset(handle: *mut ImpAnderson) -> ImpStatus {
    guard(|| {
        non_null(handle, "handle")?;
        (*handle).inner.reset();
        Ok(())
    })
}

/// # Safety
/// `handle` must come from [`imp_anderson_new`] and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn imp_anderson_free(handle: *mut ImpAnderson) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

#[no_mangle]
pub extern "C" fn imp_solve_options_default() -> ImpSolveOptions {
    let fp = FixedPointConfig::default();
    let aa = AndersonConfig::default();
    ImpSolveOptions {
        depth: 5,
        damping: aa.damping,
        alternation: aa.alternation,
        rel_tol: fp.rel_tol,
        abs_tol: fp.abs_tol,
        max_iter: fp.max_iter,
    }
}

/// Solves `x = G(x)` from `x0`. On [`ImpStatus::Ok`] and
/// [`ImpStatus::NotConverged`] `x_out` holds the last checked iterate and
/// `iterations` (may be null) the number of map evaluations.
///
/// # Safety
/// `x0` and `x_out` must be valid for `n` doubles; `options` must point to
/// a valid struct; `map` is called with `ctx` untouched.
#[no_mangle]
pub unsafe extern "C" fn imp_solve_fixed_point(
    map: ImpMapFn,
    ctx: *mut c_void,
    n: usize,
    x0: *const f64,
    options: *const ImpSolveOptions,
    x_out: *mut f64,
    iterations: *mut usize,
) -> ImpStatus {
    guard(|| {
        let map = map.ok_or((ImpStatus::NullPointer, "map is null".to_owned()))?;
        non_null(x0, "x0")?;
        non_null(options, "options")?;
        non_null(x_out, "x_out")?;
        let o = *options;
        let fp = FixedPointConfig {
            rel_tol: o.rel_tol,
            abs_tol: o.abs_tol,
            max_iter: o.max_iter,
            ..FixedPointConfig::default()
        };
        let aa = AndersonConfig {
            depth: o.depth,
            damping: o.damping,
            alternation: o.alternation,
            ..AndersonConfig::default()
        };
        let x0 = std::slice::from_raw_parts(x0, n);
        let mut callback_code = 0;
        let result = solve_fixed_point(
            |x| {
                let mut out = vec![0.0; n];
                let code = map(ctx, n, x.as_ptr(), out.as_mut_ptr());
                if code != 0 {
                    callback_code = code;
                    return Err(Error::InvalidArgument(format!("callback returned {code}")));
                }
                Ok(out)
            },
            x0,
            &fp,
            &aa,
        );
        if callback_code != 0 {
            return Err((ImpStatus::CallbackFailed, format!("map callback returned {callback_code}")));
        }
        let outcome = result.map_err(core_failure)?;
        std::slice::from_raw_parts_mut(x_out, n).copy_from_slice(&outcome.solution);
        if !iterations.is_null() {
            *iterations = outcome.report.iterations;
        }
        if outcome.report.converged() {
            Ok(())
        } else {
            Err((
                ImpStatus::NotConverged,
                format!(
                    "fixed-point iteration stopped: {:?} after {} iterations",
                    outcome.report.status, outcome.report.iterations
                ),
            ))
        }
    })
}

/// Largest time step for which the plain (depth 0) fixed-point iteration of
/// the heat equation contracts, `1 / (mu lambda_max)`, on the unit
/// `dims`-cube split into `cells` cells per side.
///
/// # Safety
/// `out` must be valid for one double.
#[no_mangle]
pub unsafe extern "C" fn imp_heat_cfl_threshold(
    dims: usize,
    cells: usize,
    mu: f64,
    mode: ImpMassMode,
    out: *mut f64,
) -> ImpStatus {
    guard(|| {
        non_null(out, "out")?;
        let grid = GridSpec::unit(dims, cells).map_err(core_failure)?;
        let problem = HeatProblem::new(grid, mu, mode.into()).map_err(core_failure)?;
        *out = cfl_threshold(&problem).map_err(core_failure)?;
        Ok(())
    })
}

/// Runs an experiment config file and writes its CSV. `output` may be null
/// to use the config's own path; `threads` of 0 uses every core.
///
/// # Safety
/// `config_path` and non-null `output` must be NUL-terminated UTF-8 strings.
#[no_mangle]
pub unsafe extern "C" fn imp_run_config(
    config_path: *const c_char,
    output: *const c_char,
    timing: bool,
    threads: usize,
) -> ImpStatus {
    guard(|| {
        non_null(config_path, "config_path")?;
        let text = |p: *const c_char| {
            CStr::from_ptr(p)
                .to_str()
                .map(PathBuf::from)
                .map_err(|e| (ImpStatus::InvalidArgument, format!("path is not UTF-8: {e}")))
        };
        let path = text(config_path)?;
        let options = RunOptions {
            output: if output.is_null() { None } else { Some(text(output)?) },
            timing,
            threads: (threads > 0).then_some(threads),
        };
        run_path(&path, &options).map(|_| ()).map_err(|e| match e {
            RunError::Config(_) => (ImpStatus::ConfigError, e.to_string()),
            RunError::Io { .. } => (ImpStatus::IoError, e.to_string()),
            RunError::Internal(_) => (ImpStatus::Internal, e.to_string()),
        })
    })
}

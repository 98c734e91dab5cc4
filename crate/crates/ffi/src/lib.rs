//! C ABI for the gpcol solver.
//!
//! Problems and solutions are opaque heap handles created by `gpcol_*`
//! constructors and released with the matching `*_free`. Every fallible call
//! returns a [`GpcolStatus`]; on failure a message is kept per thread and can
//! be copied out with [`gpcol_last_error_message`].
//!
//! Points are passed row-major: `n_points * dimension` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gpcol::casebook::{case_config, CaseId};
use gpcol::config::ProblemConfig;
use gpcol::kernel::SeKernel;
use gpcol::operators::MultiIndex;
use gpcol::problem::{Problem, Solution};
use gpcol::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpcolStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

/// Opaque handle to a resolved problem.
pub struct GpcolProblem(Problem);

/// Opaque handle to a conditioned posterior.
pub struct GpcolSolution(Solution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> GpcolStatus {
    match err {
        Error::Io { .. } => GpcolStatus::Io,
        e if e.is_numerical() => GpcolStatus::Numerical,
        Error::DimensionMismatch { .. } | Error::KernelOrder { .. } | Error::InvalidKernel(_) => {
            GpcolStatus::InvalidArgument
        }
        _ => GpcolStatus::Config,
    }
}

fn fail(status: GpcolStatus, msg: impl Into<String>) -> GpcolStatus {
    set_error(msg);
    status
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), GpcolStatus>) -> GpcolStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            GpcolStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(GpcolStatus::Panic, "panic inside gpcol"),
    }
}

fn lift<T>(r: gpcol::Result<T>) -> Result<T, GpcolStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), GpcolStatus> {
    if p.is_null() {
        Err(fail(GpcolStatus::NullPointer, format!("`{what}` is null")))
    } else {
        Ok(())
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, GpcolStatus> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(GpcolStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gpcol_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated and
/// NUL-terminated) and returns the full message length excluding the NUL.
/// Returns 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gpcol_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            0
        }
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Builds a problem from a JSON config document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gpcol_problem_from_json(json: *const c_char, out: *mut *mut GpcolProblem) -> GpcolStatus {
    guard(|| {
        non_null(out, "out")?;
        let text = c_str(json, "json")?;
        let problem = lift(ProblemConfig::from_json(text).and_then(Problem::from_config))?;
        *out = Box::into_raw(Box::new(GpcolProblem(problem)));
        Ok(())
    })
}

/// Builds one of the built-in cases (`heat1d`, `disk_poisson`,
/// `disk_gaussian_source`, `star_gaussian_source`). Zero counts select the
/// case defaults.
///
/// # Safety
/// `case_id` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gpcol_problem_from_case(
    case_id: *const c_char,
    n_interior: usize,
    n_boundary: usize,
    out: *mut *mut GpcolProblem,
) -> GpcolStatus {
    guard(|| {
        non_null(out, "out")?;
        let id: CaseId = lift(c_str(case_id, "case_id")?.parse())?;
        let (di, db) = id.default_counts();
        let n_i = if n_interior == 0 { di } else { n_interior };
        let n_b = if n_boundary == 0 { db } else { n_boundary };
        let problem = lift(Problem::from_config(case_config(id, n_i, n_b)))?;
        *out = Box::into_raw(Box::new(GpcolProblem(problem)));
        Ok(())
    })
}

/// # Safety
/// `problem` must be null or a handle from a `gpcol_problem_*` constructor
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn gpcol_problem_free(problem: *mut GpcolProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Spatial dimension, or 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gpcol_problem_dimension(problem: *const GpcolProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.0.spec.dim())
}

/// Number of interior and boundary observations.
///
/// # Safety
/// `problem` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn gpcol_problem_counts(
    problem: *const GpcolProblem,
    n_interior: *mut usize,
    n_boundary: *mut usize,
) -> GpcolStatus {
    guard(|| {
        non_null(problem, "problem")?;
        non_null(n_interior, "n_interior")?;
        non_null(n_boundary, "n_boundary")?;
        let d = &(*problem).0.spec.discretization;
        *n_interior = d.interior.len();
        *n_boundary = d.boundary.len();
        Ok(())
    })
}

/// Chooses the lengthscale (fixed or by likelihood search) and conditions
/// the prior.
///
/// # Safety
/// `problem` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gpcol_problem_solve(problem: *const GpcolProblem, out: *mut *mut GpcolSolution) -> GpcolStatus {
    guard(|| {
        non_null(problem, "problem")?;
        non_null(out, "out")?;
        let solution = lift((*problem).0.solve())?;
        *out = Box::into_raw(Box::new(GpcolSolution(solution)));
        Ok(())
    })
}

/// # Safety
/// `solution` must be null or a live handle from [`gpcol_problem_solve`].
#[no_mangle]
pub unsafe extern "C" fn gpcol_solution_free(solution: *mut GpcolSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Lengthscale used by the posterior, or NaN for a null handle.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gpcol_solution_lengthscale(solution: *const GpcolSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.0.lengthscale)
}

/// Diagonal jitter added before factorization, or NaN for a null handle.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gpcol_solution_jitter(solution: *const GpcolSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.0.field.system().jitter_used())
}

/// Spatial dimension, or 0 for a null handle.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gpcol_solution_dimension(solution: *const GpcolSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.0.field.spec().dim())
}

/// Posterior mean and variance at `n_points` points. Either output may be
/// null to skip it.
///
/// # Safety
/// `points` must hold `n_points * dimension` doubles; non-null outputs must
/// hold `n_points` doubles.
#[no_mangle]
pub unsafe extern "C" fn gpcol_solution_evaluate(
    solution: *const GpcolSolution,
    points: *const f64,
    n_points: usize,
    mean_out: *mut f64,
    variance_out: *mut f64,
) -> GpcolStatus {
    guard(|| {
        non_null(solution, "solution")?;
        let field = &(*solution).0.field;
        let dim = field.spec().dim();
        if n_points == 0 {
            return Ok(());
        }
        non_null(points, "points")?;
        let pts = std::slice::from_raw_parts(points, n_points * dim);
        for (i, x) in pts.chunks_exact(dim).enumerate() {
            let (m, v) = lift(field.mean_and_variance(x))?;
            if !mean_out.is_null() {
                *mean_out.add(i) = m;
            }
            if !variance_out.is_null() {
                *variance_out.add(i) = v;
            }
        }
        Ok(())
    })
}

/// Posterior covariance between `x` and `x_prime`.
///
/// # Safety
/// `x` and `x_prime` must each hold `dimension` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gpcol_solution_covariance(
    solution: *const GpcolSolution,
    x: *const f64,
    x_prime: *const f64,
    out: *mut f64,
) -> GpcolStatus {
    guard(|| {
        non_null(solution, "solution")?;
        non_null(x, "x")?;
        non_null(x_prime, "x_prime")?;
        non_null(out, "out")?;
        let field = &(*solution).0.field;
        let dim = field.spec().dim();
        let (a, b) = (
            std::slice::from_raw_parts(x, dim),
            std::slice::from_raw_parts(x_prime, dim),
        );
        *out = lift(field.covariance(a, b))?;
        Ok(())
    })
}

/// Mixed derivative `d^alpha_x d^beta_x' c(x, x')` of the squared-exponential
/// kernel with signal `signal` and per-coordinate `lengthscales`.
///
/// # Safety
/// `lengthscales`, `alpha`, `beta`, `x` and `x_prime` must each hold `dim`
/// elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gpcol_kernel_derivative(
    signal: f64,
    lengthscales: *const f64,
    dim: usize,
    alpha: *const u32,
    beta: *const u32,
    x: *const f64,
    x_prime: *const f64,
    out: *mut f64,
) -> GpcolStatus {
    guard(|| {
        non_null(lengthscales, "lengthscales")?;
        non_null(alpha, "alpha")?;
        non_null(beta, "beta")?;
        non_null(x, "x")?;
        non_null(x_prime, "x_prime")?;
        non_null(out, "out")?;
        let ls = std::slice::from_raw_parts(lengthscales, dim).to_vec();
        let kernel = lift(SeKernel::new(signal, ls))?;
        let a = MultiIndex::new(std::slice::from_raw_parts(alpha, dim).to_vec());
        let b = MultiIndex::new(std::slice::from_raw_parts(beta, dim).to_vec());
        *out = lift(kernel.eval_derivative(
            &a,
            &b,
            std::slice::from_raw_parts(x, dim),
            std::slice::from_raw_parts(x_prime, dim),
        ))?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_statuses() {
        assert_eq!(status_of(&Error::IllConditioned { jitter: 1.0 }), GpcolStatus::Numerical);
        assert_eq!(status_of(&Error::NoOracle), GpcolStatus::Config);
        assert_eq!(status_of(&Error::InvalidKernel("s".into())), GpcolStatus::InvalidArgument);
        let io = Error::Io {
            path: "x".into(),
            source: std::io::Error::other("boom"),
        };
        assert_eq!(status_of(&io), GpcolStatus::Io);
    }

    #[test]
    fn panics_become_a_status() {
        let status = guard(|| panic!("inside"));
        assert_eq!(status, GpcolStatus::Panic);
        let mut buf = [0 as c_char; 64];
        let n = unsafe { gpcol_last_error_message(buf.as_mut_ptr(), buf.len()) };
        assert!(n > 0);
    }

    #[test]
    fn guard_clears_previous_errors() {
        set_error("old");
        assert_eq!(guard(|| Ok(())), GpcolStatus::Ok);
        assert_eq!(unsafe { gpcol_last_error_message(ptr::null_mut(), 0) }, 0);
    }
}

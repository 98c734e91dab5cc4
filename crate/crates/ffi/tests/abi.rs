use std::ffi::{CStr, CString};
use std::ptr;

use gpcol_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { gpcol_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let msg = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned();
    assert_eq!(n.min(buf.len() - 1), msg.len());
    msg
}

fn case(id: &str, n_i: usize, n_b: usize) -> *mut GpcolProblem {
    let id = CString::new(id).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { gpcol_problem_from_case(id.as_ptr(), n_i, n_b, &mut p) }, GpcolStatus::Ok);
    assert!(!p.is_null());
    p
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(gpcol_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn disk_poisson_round_trip() {
    let problem = case("disk_poisson", 0, 0);
    let (mut n_i, mut n_b) = (0usize, 0usize);
    unsafe {
        assert_eq!(gpcol_problem_dimension(problem), 2);
        assert_eq!(gpcol_problem_counts(problem, &mut n_i, &mut n_b), GpcolStatus::Ok);
    }
    assert_eq!((n_i, n_b), (16, 5));

    let mut solution = ptr::null_mut();
    assert_eq!(unsafe { gpcol_problem_solve(problem, &mut solution) }, GpcolStatus::Ok);
    unsafe {
        assert_eq!(gpcol_solution_lengthscale(solution), 3.5);
        assert!(gpcol_solution_jitter(solution) > 0.0);
        assert_eq!(gpcol_solution_dimension(solution), 2);
    }

    let points = [0.0, 0.0, 0.5, 0.0, 100.0, 100.0];
    let (mut mean, mut var) = ([0.0; 3], [0.0; 3]);
    let status = unsafe { gpcol_solution_evaluate(solution, points.as_ptr(), 3, mean.as_mut_ptr(), var.as_mut_ptr()) };
    assert_eq!(status, GpcolStatus::Ok);
    assert!((mean[0] - 0.25).abs() < 1e-3);
    assert!((mean[1] - 0.1875).abs() < 1e-2);
    assert!((var[2] - 0.01).abs() < 1e-12);
    assert!(var.iter().all(|v| *v >= 0.0));

    let mut only_mean = [0.0; 3];
    let status = unsafe { gpcol_solution_evaluate(solution, points.as_ptr(), 3, only_mean.as_mut_ptr(), ptr::null_mut()) };
    assert_eq!(status, GpcolStatus::Ok);
    assert_eq!(only_mean, mean);

    let (mut c01, mut c10) = (0.0, 0.0);
    unsafe {
        assert_eq!(gpcol_solution_covariance(solution, points.as_ptr(), points[2..].as_ptr(), &mut c01), GpcolStatus::Ok);
        assert_eq!(gpcol_solution_covariance(solution, points[2..].as_ptr(), points.as_ptr(), &mut c10), GpcolStatus::Ok);
    }
    assert!((c01 - c10).abs() <= 1e-12 * c01.abs().max(1e-300));

    unsafe {
        gpcol_solution_free(solution);
        gpcol_problem_free(problem);
    }
}

#[test]
fn json_problems_and_config_errors() {
    let json = CString::new(gpcol::casebook::case_config(gpcol::casebook::CaseId::Heat1d, 10, 2).to_json()).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { gpcol_problem_from_json(json.as_ptr(), &mut p) }, GpcolStatus::Ok);
    assert_eq!(unsafe { gpcol_problem_dimension(p) }, 1);
    unsafe { gpcol_problem_free(p) };

    let bad = CString::new("{\"domain\": 1}").unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { gpcol_problem_from_json(bad.as_ptr(), &mut p) }, GpcolStatus::Config);
    assert!(p.is_null());
    assert!(!last_error().is_empty());

    let unknown = CString::new("heat2d").unwrap();
    assert_eq!(unsafe { gpcol_problem_from_case(unknown.as_ptr(), 0, 0, &mut p) }, GpcolStatus::Config);
    assert!(last_error().contains("heat2d"));
}

#[test]
fn null_arguments_are_reported() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { gpcol_problem_from_json(ptr::null(), &mut p) }, GpcolStatus::NullPointer);
    assert!(!last_error().is_empty());
    let mut solution = ptr::null_mut();
    assert_eq!(unsafe { gpcol_problem_solve(ptr::null(), &mut solution) }, GpcolStatus::NullPointer);
    unsafe {
        gpcol_problem_free(ptr::null_mut());
        gpcol_solution_free(ptr::null_mut());
    }
}

#[test]
fn successful_calls_clear_the_error() {
    let mut p = ptr::null_mut();
    unsafe { gpcol_problem_from_json(ptr::null(), &mut p) };
    let problem = case("heat1d", 10, 2);
    assert_eq!(unsafe { gpcol_last_error_message(ptr::null_mut(), 0) }, 0);
    unsafe { gpcol_problem_free(problem) };
}

#[test]
fn error_message_truncates_safely() {
    let mut p = ptr::null_mut();
    unsafe { gpcol_problem_from_json(ptr::null(), &mut p) };
    let full = unsafe { gpcol_last_error_message(ptr::null_mut(), 0) };
    let mut small = [0x55 as std::ffi::c_char; 4];
    let n = unsafe { gpcol_last_error_message(small.as_mut_ptr(), small.len()) };
    assert_eq!(n, full);
    assert_eq!(small[3], 0);
}

#[test]
fn kernel_derivative_matches_core() {
    let ell = [0.7, 1.3];
    let (alpha, beta) = ([2u32, 1], [1u32, 0]);
    let (x, xp) = ([0.1, -0.4], [0.9, 0.2]);
    let mut out = 0.0;
    let status = unsafe {
        gpcol_kernel_derivative(1.5, ell.as_ptr(), 2, alpha.as_ptr(), beta.as_ptr(), x.as_ptr(), xp.as_ptr(), &mut out)
    };
    assert_eq!(status, GpcolStatus::Ok);
    let k = gpcol::kernel::SeKernel::new(1.5, ell.to_vec()).unwrap();
    let m = |v: [u32; 2]| gpcol::operators::MultiIndex::new(v.to_vec());
    assert_eq!(out, k.eval_derivative(&m(alpha), &m(beta), &x, &xp).unwrap());

    let too_high = [9u32, 0];
    let status = unsafe {
        gpcol_kernel_derivative(1.5, ell.as_ptr(), 2, too_high.as_ptr(), beta.as_ptr(), x.as_ptr(), xp.as_ptr(), &mut out)
    };
    assert_eq!(status, GpcolStatus::InvalidArgument);
    let status = unsafe {
        gpcol_kernel_derivative(-1.0, ell.as_ptr(), 2, alpha.as_ptr(), beta.as_ptr(), x.as_ptr(), xp.as_ptr(), &mut out)
    };
    assert_eq!(status, GpcolStatus::InvalidArgument);
}

#[test]
fn handles_are_usable_across_threads() {
    let problem = case("disk_poisson", 0, 0);
    let mut solution = ptr::null_mut();
    assert_eq!(unsafe { gpcol_problem_solve(problem, &mut solution) }, GpcolStatus::Ok);
    let addr = solution as usize;
    let handles: Vec<_> = (0..4)
        .map(|i| {
            std::thread::spawn(move || {
                let p = [0.1 * i as f64, 0.0];
                let mut m = 0.0;
                let s = addr as *const GpcolSolution;
                assert_eq!(unsafe { gpcol_solution_evaluate(s, p.as_ptr(), 1, &mut m, ptr::null_mut()) }, GpcolStatus::Ok);
                m
            })
        })
        .collect();
    let means: Vec<f64> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert!(means.iter().all(|m| m.is_finite()));
    unsafe {
        gpcol_solution_free(solution);
        gpcol_problem_free(problem);
    }
}

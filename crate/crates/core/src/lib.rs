//! Probabilistic meshless solver for linear boundary value problems.
//!
//! A Gaussian-process prior with squared-exponential covariance is
//! conditioned on the PDE `L[u] = f` at interior collocation points and on
//! boundary conditions `B_j[u] = g` at boundary points. The posterior mean is
//! the solution estimate; the posterior variance is a pointwise error bar for
//! the discretization.
//!
//! ```
//! use gpcol::casebook::{build_case, exact_disk_solution, CaseId};
//! use gpcol::gp::PosteriorField;
//!
//! let spec = build_case(CaseId::DiskPoisson, 16, 5).unwrap();
//! let field = PosteriorField::new(spec).unwrap();
//! let (mean, var) = field.mean_and_variance(&[0.0, 0.0]).unwrap();
//! assert!((mean - exact_disk_solution(&[0.0, 0.0]).unwrap()).abs() < 1e-2);
//! assert!(var >= 0.0);
//! ```

pub mod casebook;
pub mod cli;
pub mod config;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod gp;
pub mod kernel;
pub mod operators;
pub mod problem;

pub use error::{Error, Result};

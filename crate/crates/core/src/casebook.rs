//! Built-in benchmark problems and their reference solutions.
//!
//! | id                     | domain                          | PDE                                   | s    | lengthscale      |
//! |------------------------|---------------------------------|---------------------------------------|------|------------------|
//! | `heat1d`               | `[0, 3]`                        | `-(a u')' - u/2 = exp(-(x-2)^2)`      | 2    | likelihood search|
//! | `disk_poisson`         | unit disk                       | `-lap u = 1`, `u = 0` on the boundary | 0.1  | 3.5              |
//! | `disk_gaussian_source` | unit disk                       | `-lap u = ` Gaussian bump             | 0.01 | 0.26             |
//! | `star_gaussian_source` | `r(t) = 0.8 (1 + 0.2 cos 3t)`   | `-lap u = ` Gaussian bump             | 0.2  | likelihood search|
//!
//! `heat1d` has `a(x) = atan(20 (x - 1)) / 2 + 1`, `u'(0) = 0` and `u(3) = 0`.
//! The solver takes operators in expanded form, so the casebook ships
//! `-(a u')' = -a u'' - a' u'` with `a'(x) = 10 / (1 + 400 (x - 1)^2)`.
//!
//! The Gaussian bump is `4 exp(-((R x1 - x01)^2 + (R x2 - x02)^2) / (2 lambda^2))`
//! with `lambda = 0.025`; the disk case uses `R = 0.3` and
//! `x0 = 0.6 R (cos 0.2, sin 0.2)`, the star case `R = 0.8` and
//! `x0 = R (cos pi/4, sin pi/4)`.
//!
//! The star-shaped outline is a stand-in: any concrete non-convex shape
//! serves, and no reference solution exists for it.

use std::fmt;
use std::str::FromStr;

use crate::config::{
    BoundaryConfig, BoundaryOperatorConfig, BoundarySelector, DiscretizationConfig, DomainConfig,
    EllSearchConfig, KernelConfig, OperatorConfig, OracleConfig, ProblemConfig, StrategyName,
    TermConfig,
};
use crate::error::{Error, Result};
use crate::gp::ProblemSpec;

/// Grid size of the finite-difference reference used for `heat1d`.
pub const HEAT1D_REFERENCE_CELLS: usize = 10_000;

/// Diffusivity of the heat problem.
pub fn heat1d_conductivity(x: f64) -> f64 {
    0.5 * (20.0 * (x - 1.0)).atan() + 1.0
}

pub fn heat1d_source(x: f64) -> f64 {
    (-(x - 2.0) * (x - 2.0)).exp()
}

/// Seed of the random interior layout of `disk_gaussian_source`.
pub const DISK_GAUSSIAN_SEED: u64 = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    Heat1d,
    DiskPoisson,
    DiskGaussianSource,
    StarGaussianSource,
}

impl CaseId {
    pub const ALL: [CaseId; 4] = [
        CaseId::Heat1d,
        CaseId::DiskPoisson,
        CaseId::DiskGaussianSource,
        CaseId::StarGaussianSource,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::Heat1d => "heat1d",
            CaseId::DiskPoisson => "disk_poisson",
            CaseId::DiskGaussianSource => "disk_gaussian_source",
            CaseId::StarGaussianSource => "star_gaussian_source",
        }
    }

    /// `(n_i, n_b)` used when none are given.
    pub fn default_counts(self) -> (usize, usize) {
        match self {
            CaseId::Heat1d => (20, 2),
            CaseId::DiskPoisson => (16, 5),
            CaseId::DiskGaussianSource => (50, 20),
            CaseId::StarGaussianSource => (34, 20),
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownCase(s.to_string()))
    }
}

fn term(alpha: &[u32], coeff: impl Into<String>) -> TermConfig {
    TermConfig {
        alpha: alpha.to_vec(),
        coeff: coeff.into(),
    }
}

fn neg_laplacian() -> OperatorConfig {
    OperatorConfig {
        terms: vec![term(&[2, 0], "-1"), term(&[0, 2], "-1")],
    }
}

fn dirichlet_zero_everywhere() -> Vec<BoundaryConfig> {
    vec![BoundaryConfig {
        selector: Some(BoundarySelector::All),
        point: None,
        operator: BoundaryOperatorConfig::Dirichlet,
        value: "0".into(),
    }]
}

fn gaussian_bump(scale: f64, center: (f64, f64)) -> String {
    format!(
        "4*exp(-0.5*(({scale:?}*x1-{:?})/0.025)^2-0.5*(({scale:?}*x2-{:?})/0.025)^2)",
        center.0, center.1
    )
}

/// The config document of a built-in case.
pub fn case_config(id: CaseId, n_i: usize, n_b: usize) -> ProblemConfig {
    match id {
        CaseId::Heat1d => ProblemConfig {
            domain: DomainConfig::Interval { a: 0.0, b: 3.0 },
            operator: OperatorConfig {
                terms: vec![
                    term(&[2], "-(0.5*atan(20*(x1-1))+1)"),
                    term(&[1], "-10/(1+400*(x1-1)^2)"),
                    term(&[0], "-0.5"),
                ],
            },
            source: "exp(-(x1-2)^2)".into(),
            boundary: vec![
                BoundaryConfig {
                    selector: None,
                    point: Some(vec![0.0]),
                    operator: BoundaryOperatorConfig::Terms(vec![term(&[1], "1")]),
                    value: "0".into(),
                },
                BoundaryConfig {
                    selector: None,
                    point: Some(vec![3.0]),
                    operator: BoundaryOperatorConfig::Dirichlet,
                    value: "0".into(),
                },
            ],
            kernel: KernelConfig {
                s: 2.0,
                ell: None,
                ell_search: Some(EllSearchConfig::default()),
            },
            discretization: DiscretizationConfig {
                n_i,
                n_b,
                strategy: StrategyName::Equidistant,
                seed: None,
            },
            oracle: Some(OracleConfig::Heat1dFd {
                n: HEAT1D_REFERENCE_CELLS,
            }),
        },
        CaseId::DiskPoisson => ProblemConfig {
            domain: DomainConfig::UnitDisk,
            operator: neg_laplacian(),
            source: "1".into(),
            boundary: dirichlet_zero_everywhere(),
            kernel: KernelConfig {
                s: 0.1,
                ell: Some(3.5),
                ell_search: None,
            },
            discretization: DiscretizationConfig {
                n_i,
                n_b,
                strategy: StrategyName::Sunflower,
                seed: None,
            },
            oracle: Some(OracleConfig::Exact("(1-x1^2-x2^2)/4".into())),
        },
        CaseId::DiskGaussianSource => {
            let r = 0.3;
            ProblemConfig {
                domain: DomainConfig::UnitDisk,
                operator: neg_laplacian(),
                source: gaussian_bump(r, (0.6 * r * 0.2_f64.cos(), 0.6 * r * 0.2_f64.sin())),
                boundary: dirichlet_zero_everywhere(),
                kernel: KernelConfig {
                    s: 0.01,
                    ell: Some(0.26),
                    ell_search: None,
                },
                discretization: DiscretizationConfig {
                    n_i,
                    n_b,
                    strategy: StrategyName::UniformRandom,
                    seed: Some(DISK_GAUSSIAN_SEED),
                },
                oracle: None,
            }
        }
        CaseId::StarGaussianSource => {
            let r = 0.8;
            let angle = std::f64::consts::FRAC_PI_4;
            ProblemConfig {
                domain: DomainConfig::StarShaped {
                    radius: "0.8*(1+0.2*cos(3*x1))".into(),
                },
                operator: neg_laplacian(),
                source: gaussian_bump(r, (r * angle.cos(), r * angle.sin())),
                boundary: dirichlet_zero_everywhere(),
                kernel: KernelConfig {
                    s: 0.2,
                    ell: None,
                    ell_search: Some(EllSearchConfig::default()),
                },
                discretization: DiscretizationConfig {
                    n_i,
                    n_b,
                    strategy: StrategyName::Sunflower,
                    seed: None,
                },
                oracle: None,
            }
        }
    }
}

pub fn build_case(id: CaseId, n_i: usize, n_b: usize) -> Result<ProblemSpec> {
    if n_i == 0 || n_b == 0 {
        return Err(Error::InvalidDiscretization("case studies need n_i, n_b >= 1".into()));
    }
    case_config(id, n_i, n_b).to_spec()
}

/// `(1 - x1^2 - x2^2) / 4`, the solution of `disk_poisson`.
pub fn exact_disk_solution(x: &[f64]) -> Result<f64> {
    if x.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: x.len(),
        });
    }
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2.sqrt() - 1.0 > crate::geometry::BOUNDARY_TOLERANCE {
        return Err(Error::Domain(format!("{x:?} is outside the unit disk")));
    }
    Ok((1.0 - r2) / 4.0)
}

/// Finite-difference solution on a uniform grid with linear interpolation
/// between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FdReference {
    nodes: Vec<f64>,
    values: Vec<f64>,
    residual: f64,
    neumann_residual: f64,
}

impl FdReference {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Max-norm residual of the assembled (h^2-scaled) discrete system.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `|-3 u_0 + 4 u_1 - u_2|`, the imposed Neumann row.
    pub fn neumann_residual(&self) -> f64 {
        self.neumann_residual
    }

    pub fn value_at(&self, x: f64) -> Result<f64> {
        let (a, b) = (self.nodes[0], self.nodes[self.len() - 1]);
        let tol = 1e-12 * (b - a);
        if !(x >= a - tol && x <= b + tol) {
            return Err(Error::Domain(format!("{x} is outside [{a}, {b}]")));
        }
        let h = (b - a) / (self.len() - 1) as f64;
        let k = (((x - a) / h).floor().max(0.0) as usize).min(self.len() - 2);
        if (x - self.nodes[k + 1]).abs() <= tol {
            return Ok(self.values[k + 1]);
        }
        let t = ((x - self.nodes[k]) / h).clamp(0.0, 1.0);
        Ok((1.0 - t) * self.values[k] + t * self.values[k + 1])
    }
}

/// Solves `-(a u')' + q u = f` on `[left, right]` with `u'(left) = 0` and
/// `u(right) = 0` on a uniform grid of `n` cells (`n + 1` nodes), so grids
/// with `n` and `2n` cells nest.
///
/// Interior rows use the flux form with `a` at cell midpoints; the Neumann
/// row is the one-sided stencil `-3 u_0 + 4 u_1 - u_2 = 0`, folded into
/// tridiagonal shape with the first interior row.
pub fn fd_solve_neumann_dirichlet(
    (left, right): (f64, f64),
    n: usize,
    a: impl Fn(f64) -> f64,
    q: f64,
    f: impl Fn(f64) -> f64,
) -> Result<FdReference> {
    if n < 16 {
        return Err(Error::InvalidDiscretization(format!("need at least 16 grid cells, got {n}")));
    }
    let h = (right - left) / n as f64;
    let node = |i: usize| left + i as f64 * h;
    let nodes: Vec<f64> = (0..=n).map(node).collect();
    let m = n; // unknowns u_0 .. u_{n-1}; u_n = 0

    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    let flux = |i: usize| a(left + (i as f64 + 0.5) * h); // a_{i+1/2}
    for i in 1..m {
        lower[i] = -flux(i - 1);
        diag[i] = flux(i - 1) + flux(i) + q * h * h;
        upper[i] = -flux(i);
        rhs[i] = h * h * f(nodes[i]);
    }
    // -3 u_0 + 4 u_1 - u_2 = 0 minus (1 / a_{3/2}) times row 1.
    let ratio = 1.0 / flux(1);
    diag[0] = -3.0 - ratio * lower[1];
    upper[0] = 4.0 - ratio * diag[1];
    rhs[0] = -ratio * rhs[1];

    let mut u = thomas(&lower, &diag, &upper, &rhs)?;
    u.push(0.0);

    let mut residual = 0.0_f64;
    for i in 1..n {
        let r = -flux(i - 1) * u[i - 1] + (flux(i - 1) + flux(i) + q * h * h) * u[i] - flux(i) * u[i + 1]
            - h * h * f(nodes[i]);
        residual = residual.max(r.abs());
    }
    let neumann = -3.0 * u[0] + 4.0 * u[1] - u[2];
    residual = residual.max(neumann.abs());

    Ok(FdReference {
        nodes,
        values: u,
        residual,
        neumann_residual: neumann.abs(),
    })
}

/// Reference solution of `heat1d` on `n` grid cells.
pub fn fd_solve_heat1d(n: usize) -> Result<FdReference> {
    fd_solve_neumann_dirichlet((0.0, 3.0), n, heat1d_conductivity, -0.5, heat1d_source)
}

/// Thomas algorithm; `lower[0]` and `upper[n-1]` are ignored.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::SingularTridiagonal { row: 0 });
    }
    c[0] = upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularTridiagonal { row: i });
        }
        c[i] = if i + 1 < n { upper[i] / pivot } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

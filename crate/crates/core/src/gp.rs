//! Conditioning the Gaussian-process prior on collocation observations.
//!
//! The observations are `L[u](x_j) = f(x_j)` at the interior points and
//! `B_j[u](x_j) = g(x_j)` at the boundary points. Their joint covariance `C`
//! is assembled from kernel derivatives, factorized once, and reused for the
//! posterior mean, covariance and the log marginal likelihood.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::geometry::{BoundaryDatum, Discretization, Domain};
use crate::kernel::SeKernel;
use crate::operators::{apply_local, check_boundary_order, LinearDiffOperator, LocalOperator, OrderCheck};

/// First jitter tried, relative to the largest diagonal entry of `C`.
pub const BASE_JITTER: f64 = 1e-10;
/// Largest jitter tried before giving up, relative to the largest diagonal entry.
pub const MAX_JITTER: f64 = 1e-4;
/// Upper bound on refinement sweeps applied to the collocation weights.
pub const REFINEMENT_STEPS: usize = 200;
/// Refinement stops once `|b - C w|` drops below this fraction of `|b|`.
pub const REFINEMENT_TOLERANCE: f64 = 1e-12;
/// Negative posterior variances down to `-NEGATIVE_VARIANCE_TOLERANCE * s^2`
/// are clipped to zero; anything lower is an error.
pub const NEGATIVE_VARIANCE_TOLERANCE: f64 = 1e-10;

/// A linear boundary value problem together with its collocation points and
/// prior.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub domain: Domain,
    pub operator: LinearDiffOperator,
    pub source: Expression,
    pub discretization: Discretization,
    pub kernel: SeKernel,
}

impl ProblemSpec {
    /// Checks that every component has the domain's dimension, that interior
    /// points are inside and that boundary points are on the boundary.
    /// Duplicate points are not rejected here; see [`Discretization::validate`].
    pub fn new(
        domain: Domain,
        operator: LinearDiffOperator,
        source: Expression,
        discretization: Discretization,
        kernel: SeKernel,
    ) -> Result<Self> {
        let d = domain.dim();
        for found in [operator.dim(), kernel.dim()] {
            if found != d {
                return Err(Error::DimensionMismatch { expected: d, found });
            }
        }
        if source.arity() > d {
            return Err(Error::VariableOutOfRange {
                index: source.arity(),
                dim: d,
            });
        }
        for p in &discretization.interior {
            if !domain.contains(p)? {
                return Err(Error::InvalidDiscretization(format!(
                    "interior point {p:?} is not strictly inside the {}",
                    domain.name()
                )));
            }
        }
        for b in &discretization.boundary {
            check_boundary_order(&operator, &b.operator)?;
            if !domain.on_boundary(&b.point)? {
                return Err(Error::NotOnBoundary {
                    point: b.point.clone(),
                });
            }
        }
        Ok(ProblemSpec {
            domain,
            operator,
            source,
            discretization,
            kernel,
        })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn with_kernel(&self, kernel: SeKernel) -> Result<Self> {
        if kernel.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: kernel.dim(),
            });
        }
        Ok(ProblemSpec {
            kernel,
            ..self.clone()
        })
    }

    /// Boundary operators that are not at least one order below the interior
    /// operator. Such problems are still solved.
    pub fn order_warnings(&self) -> Vec<(Vec<f64>, OrderCheck)> {
        self.discretization
            .boundary
            .iter()
            .filter_map(|b| match check_boundary_order(&self.operator, &b.operator) {
                Ok(w @ OrderCheck::Warning { .. }) => Some((b.point.clone(), w)),
                _ => None,
            })
            .collect()
    }

    /// Observation functionals with coefficients frozen at their points,
    /// interior first.
    pub fn observations(&self) -> Result<Vec<Observation>> {
        let interior = self.discretization.interior.iter().map(|p| {
            Ok(Observation {
                point: p.clone(),
                operator: self.operator.at(p)?,
            })
        });
        let boundary = self.discretization.boundary.iter().map(|b| {
            Ok(Observation {
                point: b.point.clone(),
                operator: b.operator.at(&b.point)?,
            })
        });
        interior.chain(boundary).collect()
    }

    /// `y = (f(X^i), g(X^b))`.
    pub fn observed_values(&self) -> Result<Vec<f64>> {
        let mut y = self
            .discretization
            .interior
            .iter()
            .map(|p| self.source.evaluate(p))
            .collect::<Result<Vec<_>>>()?;
        y.extend(self.discretization.boundary.iter().map(|b: &BoundaryDatum| b.value));
        Ok(y)
    }
}

/// One linear functional of `u` evaluated at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub point: Vec<f64>,
    pub operator: LocalOperator,
}

/// The covariance system `C w = y` and its Cholesky factor.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    covariance: DMatrix<f64>,
    rhs: DVector<f64>,
    chol: Option<Cholesky<f64, Dyn>>,
    jitter_used: f64,
}

impl AssembledSystem {
    /// Builds `C` for `observations` under `kernel` and factorizes it,
    /// escalating the diagonal jitter tenfold from [`BASE_JITTER`] to
    /// [`MAX_JITTER`] (both relative to the largest diagonal entry).
    pub fn build(observations: &[Observation], rhs: Vec<f64>, kernel: &SeKernel) -> Result<Self> {
        let n = observations.len();
        let mut c = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let (a, b) = (&observations[i], &observations[j]);
                let v = apply_local(&a.operator, Some(&b.operator), kernel, &a.point, &b.point)?;
                c[(i, j)] = v;
                c[(j, i)] = v;
            }
        }
        let rhs = DVector::from_vec(rhs);
        if n == 0 {
            return Ok(AssembledSystem {
                covariance: c,
                rhs,
                chol: None,
                jitter_used: 0.0,
            });
        }
        let scale = c.diagonal().max();
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::IllConditioned { jitter: 0.0 });
        }
        let mut jitter = BASE_JITTER * scale;
        loop {
            let mut shifted = c.clone();
            for i in 0..n {
                shifted[(i, i)] += jitter;
            }
            if let Some(chol) = Cholesky::new(shifted) {
                return Ok(AssembledSystem {
                    covariance: c,
                    rhs,
                    chol: Some(chol),
                    jitter_used: jitter,
                });
            }
            if jitter >= MAX_JITTER * scale * (1.0 - 1e-12) {
                return Err(Error::IllConditioned { jitter });
            }
            jitter *= 10.0;
        }
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    /// Lower-triangular factor of `C + jitter I`.
    pub fn factor(&self) -> DMatrix<f64> {
        match &self.chol {
            Some(ch) => ch.l(),
            None => DMatrix::zeros(0, 0),
        }
    }

    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    /// `(C + jitter I)^{-1} b` by two triangular solves.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        match &self.chol {
            Some(ch) => ch.solve(b),
            None => DVector::zeros(0),
        }
    }

    /// Approximates `C^{-1} b` for the unshifted `C` by iterative refinement
    /// on top of the jittered factor, keeping the iterate with the smallest
    /// residual `|b - C w|`.
    pub fn solve_refined(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut w = self.solve(b);
        if w.is_empty() {
            return w;
        }
        let mut r = b - &self.covariance * &w;
        let mut best = r.amax();
        let target = REFINEMENT_TOLERANCE * b.amax();
        for _ in 0..REFINEMENT_STEPS {
            if best <= target {
                break;
            }
            let candidate = &w + self.solve(&r);
            let next = b - &self.covariance * &candidate;
            let size = next.amax();
            if size.is_nan() || size >= best {
                break;
            }
            let gain = best / size;
            w = candidate;
            r = next;
            best = size;
            if gain < 1.01 {
                break;
            }
        }
        w
    }

    /// `L^{-1} b` for the lower factor `L`.
    pub fn whiten(&self, b: &DVector<f64>) -> DVector<f64> {
        match &self.chol {
            Some(ch) => ch
                .l_dirty()
                .solve_lower_triangular(b)
                .expect("Cholesky factor has a positive diagonal"),
            None => DVector::zeros(0),
        }
    }

    /// `log det (C + jitter I)`.
    pub fn log_determinant(&self) -> f64 {
        match &self.chol {
            Some(ch) => 2.0 * ch.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>(),
            None => 0.0,
        }
    }

    /// Gaussian log evidence `-y'C^{-1}y/2 - log det C / 2 - n log(2 pi) / 2`.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let z = self.whiten(&self.rhs);
        let n = self.len() as f64;
        -0.5 * z.dot(&z) - 0.5 * self.log_determinant() - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
    }
}

pub fn assemble(spec: &ProblemSpec) -> Result<AssembledSystem> {
    AssembledSystem::build(&spec.observations()?, spec.observed_values()?, &spec.kernel)
}

pub fn log_marginal_likelihood(spec: &ProblemSpec) -> Result<f64> {
    Ok(assemble(spec)?.log_marginal_likelihood())
}

/// The conditioned process: posterior mean, covariance and variance.
#[derive(Debug, Clone)]
pub struct PosteriorField {
    spec: ProblemSpec,
    observations: Vec<Observation>,
    system: AssembledSystem,
    weights: DVector<f64>,
}

impl PosteriorField {
    pub fn new(spec: ProblemSpec) -> Result<Self> {
        let observations = spec.observations()?;
        let system = AssembledSystem::build(&observations, spec.observed_values()?, &spec.kernel)?;
        Ok(Self::from_parts(spec, observations, system))
    }

    fn from_parts(spec: ProblemSpec, observations: Vec<Observation>, system: AssembledSystem) -> Self {
        let weights = system.solve_refined(system.rhs());
        PosteriorField {
            spec,
            observations,
            system,
            weights,
        }
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn system(&self) -> &AssembledSystem {
        &self.system
    }

    /// `w = C^{-1} y`, refined against the unshifted `C`.
    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn kernel(&self) -> &SeKernel {
        &self.spec.kernel
    }

    /// `c(x)_j = Cov[u(x), B_j[u](x_j)]`: the observation operator acts on the
    /// second kernel argument.
    pub fn cross_covariance(&self, x: &[f64]) -> Result<DVector<f64>> {
        let id = LocalOperator::identity(self.spec.dim());
        let values = self
            .observations
            .iter()
            .map(|o| apply_local(&id, Some(&o.operator), &self.spec.kernel, x, &o.point))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(values))
    }

    pub fn mean(&self, x: &[f64]) -> Result<f64> {
        Ok(self.cross_covariance(x)?.dot(&self.weights))
    }

    pub fn covariance(&self, x: &[f64], xp: &[f64]) -> Result<f64> {
        let prior = self.spec.kernel.eval(x, xp)?;
        let v = self.system.whiten(&self.cross_covariance(x)?);
        let vp = self.system.whiten(&self.cross_covariance(xp)?);
        Ok(prior - v.dot(&vp))
    }

    pub fn variance(&self, x: &[f64]) -> Result<f64> {
        Ok(self.mean_and_variance(x)?.1)
    }

    /// Mean and clipped variance at `x`, sharing one cross-covariance vector.
    pub fn mean_and_variance(&self, x: &[f64]) -> Result<(f64, f64)> {
        let cx = self.cross_covariance(x)?;
        let mean = cx.dot(&self.weights);
        let v = self.system.whiten(&cx);
        let s2 = self.spec.kernel.variance();
        let var = self.spec.kernel.eval(x, x)? - v.dot(&v);
        if var < -NEGATIVE_VARIANCE_TOLERANCE * s2 {
            return Err(Error::NegativeVariance { value: var });
        }
        Ok((mean, var.max(0.0)))
    }

    /// Unclipped `c(x, x) - c(x)' C^{-1} c(x)`.
    pub fn raw_variance(&self, x: &[f64]) -> Result<f64> {
        let v = self.system.whiten(&self.cross_covariance(x)?);
        Ok(self.spec.kernel.eval(x, x)? - v.dot(&v))
    }

    /// Applies `op` to the posterior mean analytically at `x`.
    pub fn apply_operator(&self, op: &LinearDiffOperator, x: &[f64]) -> Result<f64> {
        let local = op.at(x)?;
        self.observations
            .iter()
            .zip(self.weights.iter())
            .try_fold(0.0, |acc, (o, w)| {
                Ok(acc + w * apply_local(&local, Some(&o.operator), &self.spec.kernel, x, &o.point)?)
            })
    }

    /// `L[m](x_j) - f(x_j)` at the interior points followed by
    /// `B_j[m](x_j) - g(x_j)` at the boundary points.
    pub fn collocation_residuals(&self) -> Result<Vec<f64>> {
        let d = &self.spec.discretization;
        let interior = d.interior.iter().map(|p| {
            Ok(self.apply_operator(&self.spec.operator, p)? - self.spec.source.evaluate(p)?)
        });
        let boundary = d
            .boundary
            .iter()
            .map(|b| Ok(self.apply_operator(&b.operator, &b.point)? - b.value));
        interior.chain(boundary).collect()
    }
}

/// Candidate lengthscales for the exhaustive likelihood search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthscaleGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log_spaced: bool,
}

impl LengthscaleGrid {
    pub fn new(min: f64, max: f64, count: usize, log_spaced: bool) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min > 0.0) {
            return Err(Error::InvalidGrid(format!("bounds must be positive, got [{min}, {max}]")));
        }
        if count == 0 {
            return Err(Error::InvalidGrid("need at least one grid point".into()));
        }
        if max < min || (count > 1 && max == min) {
            return Err(Error::InvalidGrid(format!("need min < max, got [{min}, {max}]")));
        }
        Ok(LengthscaleGrid {
            min,
            max,
            count,
            log_spaced,
        })
    }

    /// 40 log-spaced values over `[diameter / 100, 3 diameter]`.
    pub fn default_for(domain: &Domain) -> Result<Self> {
        let d = domain.diameter()?;
        Self::new(d / 100.0, 3.0 * d, 40, true)
    }

    /// Ascending grid values; the first is `min` and the last is `max`.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i + 1 == self.count {
                    return self.max;
                }
                let f = i as f64 / last;
                if self.log_spaced {
                    (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + f * (self.max - self.min)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthscaleProfile {
    /// Maximizing lengthscale; the first one on ties.
    pub best: f64,
    pub best_log_likelihood: f64,
    /// `(lengthscale, log likelihood)`; failed assemblies are `-inf`.
    pub log_likelihoods: Vec<(f64, f64)>,
}

impl LengthscaleProfile {
    /// Likelihood divided by its maximum, so the peak is exactly 1.
    pub fn normalized(&self) -> Vec<(f64, f64)> {
        self.log_likelihoods
            .iter()
            .map(|&(l, ll)| (l, (ll - self.best_log_likelihood).exp()))
            .collect()
    }
}

/// Exhaustive search of the log marginal likelihood over `lengthscales`,
/// tied across coordinates. Grid points run in parallel; the result does not
/// depend on scheduling.
pub fn select_lengthscale(spec: &ProblemSpec, lengthscales: &[f64]) -> Result<LengthscaleProfile> {
    if lengthscales.is_empty() {
        return Err(Error::InvalidGrid("empty lengthscale grid".into()));
    }
    let observations = spec.observations()?;
    let y = spec.observed_values()?;
    let log_likelihoods: Vec<(f64, f64)> = lengthscales
        .par_iter()
        .map(|&l| {
            let ll = spec
                .kernel
                .with_lengthscale(l)
                .and_then(|k| AssembledSystem::build(&observations, y.clone(), &k))
                .map(|sys| sys.log_marginal_likelihood())
                .ok()
                .filter(|v| v.is_finite())
                .unwrap_or(f64::NEG_INFINITY);
            (l, ll)
        })
        .collect();
    let (best, best_log_likelihood) = log_likelihoods
        .iter()
        .copied()
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    if best_log_likelihood == f64::NEG_INFINITY {
        return Err(Error::AllGridPointsFailed);
    }
    Ok(LengthscaleProfile {
        best,
        best_log_likelihood,
        log_likelihoods,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{MultiIndex, OperatorTerm};

    fn dirichlet_only(g0: f64, s: f64) -> ProblemSpec {
        let dom = Domain::interval(0.0, 1.0).unwrap();
        let disc = Discretization {
            interior: vec![],
            boundary: vec![BoundaryDatum {
                point: vec![1.0],
                operator: LinearDiffOperator::identity(1),
                value: g0,
            }],
        };
        ProblemSpec::new(
            dom,
            LinearDiffOperator::new(1, vec![OperatorTerm::new(MultiIndex::new(vec![2]), Expression::constant(-1.0))])
                .unwrap(),
            Expression::constant(0.0),
            disc,
            SeKernel::isotropic(s, 0.5, 1).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn single_dirichlet_observation() {
        let (g0, s) = (0.7, 1.5);
        let spec = dirichlet_only(g0, s);
        let sys = assemble(&spec).unwrap();
        assert_eq!(sys.covariance().shape(), (1, 1));
        assert_eq!(sys.covariance()[(0, 0)], s * s);
        assert_eq!(sys.rhs()[0], g0);

        let field = PosteriorField::new(spec).unwrap();
        assert!((field.mean(&[1.0]).unwrap() - g0).abs() < 1e-9);
        assert!(field.variance(&[1.0]).unwrap() <= 1e-9 * s * s);

        let lml = sys.log_marginal_likelihood();
        let want = -0.5 * g0 * g0 / (s * s) - 0.5 * (2.0 * std::f64::consts::PI * s * s).ln();
        assert!((lml - want).abs() < 1e-8);
    }

    #[test]
    fn empty_observation_set_is_the_prior() {
        let mut spec = dirichlet_only(0.0, 2.0);
        spec.discretization.boundary.clear();
        let field = PosteriorField::new(spec.clone()).unwrap();
        assert_eq!(field.variance(&[0.3]).unwrap(), 4.0);
        assert_eq!(field.mean(&[0.3]).unwrap(), 0.0);
        let k = spec.kernel.eval(&[0.3], &[0.6]).unwrap();
        assert_eq!(field.covariance(&[0.3], &[0.6]).unwrap(), k);
        assert_eq!(assemble(&spec).unwrap().log_marginal_likelihood(), 0.0);
    }

    #[test]
    fn far_field_variance_returns_to_prior() {
        let spec = dirichlet_only(1.0, 2.0);
        let field = PosteriorField::new(spec).unwrap();
        let x = [1.0 + 20.0 * 0.5];
        assert!((field.variance(&x).unwrap() - 4.0).abs() <= 1e-6 * 4.0);
    }

    #[test]
    fn refinement_removes_the_jitter_bias() {
        // Closely spaced Dirichlet data: the plain jittered solve leaves a
        // residual of order jitter * w.
        let dom = Domain::interval(0.0, 1.0).unwrap();
        let interior: Vec<Vec<f64>> = (1..=12).map(|j| vec![j as f64 / 13.0]).collect();
        let id = LinearDiffOperator::identity(1);
        let spec = ProblemSpec::new(
            dom,
            id.clone(),
            Expression::parse("sin(3*x1)").unwrap(),
            Discretization { interior, boundary: vec![] },
            SeKernel::isotropic(1.0, 0.4, 1).unwrap(),
        )
        .unwrap();
        let sys = assemble(&spec).unwrap();
        let y = sys.rhs().clone();
        let plain = (&y - sys.covariance() * sys.solve(&y)).amax();
        let refined = (&y - sys.covariance() * sys.solve_refined(&y)).amax();
        assert!(refined < plain, "{refined} vs {plain}");
        assert!(refined <= 1e-6 * y.amax(), "{refined}");
        let field = PosteriorField::new(spec).unwrap();
        assert_eq!(field.weights(), &sys.solve_refined(&y));
    }

    #[test]
    fn grid_values() {
        let g = LengthscaleGrid::new(0.1, 10.0, 3, true).unwrap();
        let v = g.values();
        assert_eq!(v[0], 0.1);
        assert!((v[1] - 1.0).abs() < 1e-15);
        assert_eq!(v[2], 10.0);
        assert_eq!(LengthscaleGrid::new(1.0, 3.0, 3, false).unwrap().values(), vec![1.0, 2.0, 3.0]);
        assert_eq!(LengthscaleGrid::new(0.5, 0.5, 1, true).unwrap().values(), vec![0.5]);
        assert!(LengthscaleGrid::new(0.0, 1.0, 3, true).is_err());
        assert!(LengthscaleGrid::new(2.0, 1.0, 3, true).is_err());
        assert!(LengthscaleGrid::new(1.0, 1.0, 2, true).is_err());
        assert!(LengthscaleGrid::new(1.0, 2.0, 0, true).is_err());
    }

    #[test]
    fn repeated_grid_point_selects_it() {
        let spec = dirichlet_only(0.3, 1.0);
        let prof = select_lengthscale(&spec, &[0.8, 0.8]).unwrap();
        assert_eq!(prof.best, 0.8);
        assert!(prof.normalized().iter().all(|&(_, p)| p == 1.0));
    }
}

//! JSON problem configuration.
//!
//! ```json
//! {
//!   "domain": {"kind": "unit_disk"},
//!   "operator": {"terms": [{"alpha": [2, 0], "coeff": "-1"}, {"alpha": [0, 2], "coeff": "-1"}]},
//!   "source": "1",
//!   "boundary": [{"where": "all", "operator": "dirichlet", "value": "0"}],
//!   "kernel": {"s": 0.1, "ell": 3.5},
//!   "discretization": {"n_i": 16, "n_b": 5, "strategy": "sunflower"},
//!   "oracle": {"exact": "(1-x1^2-x2^2)/4"}
//! }
//! ```
//!
//! Unknown keys are rejected everywhere.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::geometry::{BoundaryDatum, Discretization, Domain, SamplingStrategy};
use crate::gp::{LengthscaleGrid, ProblemSpec};
use crate::kernel::SeKernel;
use crate::operators::{LinearDiffOperator, MultiIndex, OperatorTerm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub domain: DomainConfig,
    pub operator: OperatorConfig,
    pub source: String,
    pub boundary: Vec<BoundaryConfig>,
    pub kernel: KernelConfig,
    pub discretization: DiscretizationConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    Interval { a: f64, b: f64 },
    UnitDisk,
    /// Radius as an expression of the angle, written as `x1`.
    StarShaped { radius: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub terms: Vec<TermConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub alpha: Vec<u32>,
    pub coeff: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySelector {
    /// Every point produced by sampling the boundary with `n_b` points.
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryOperatorConfig {
    Dirichlet,
    /// Derivative along the outward unit normal.
    NormalDerivative,
    Terms(Vec<TermConfig>),
}

/// One boundary condition, applied either at every sampled boundary point
/// (`"where": "all"`) or at one explicit `point`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    #[serde(rename = "where", default, skip_serializing_if = "Option::is_none")]
    pub selector: Option<BoundarySelector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    pub operator: BoundaryOperatorConfig,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell_search: Option<EllSearchConfig>,
}

/// Missing fields fall back to the domain's default grid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllSearchConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_spaced: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    Equidistant,
    Sunflower,
    UniformRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    pub n_i: usize,
    pub n_b: usize,
    pub strategy: StrategyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleConfig {
    /// Closed-form solution.
    Exact(String),
    /// Finite-difference reference for the built-in 1D heat problem on `n`
    /// grid cells.
    Heat1dFd { n: usize },
}

/// How the kernel lengthscale is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum LengthscalePolicy {
    Fixed(f64),
    Search(LengthscaleGrid),
}

fn parse_expr(what: &str, src: &str) -> Result<Expression> {
    Expression::parse(src).map_err(|e| Error::Config(format!("{what} `{src}`: {e}")))
}

fn build_operator(dim: usize, terms: &[TermConfig]) -> Result<LinearDiffOperator> {
    let terms = terms
        .iter()
        .map(|t| {
            Ok(OperatorTerm::new(
                MultiIndex::new(t.alpha.clone()),
                parse_expr("coefficient", &t.coeff)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    LinearDiffOperator::new(dim, terms)
}

impl DomainConfig {
    pub fn build(&self) -> Result<Domain> {
        match self {
            DomainConfig::Interval { a, b } => Domain::interval(*a, *b),
            DomainConfig::UnitDisk => Ok(Domain::UnitDisk),
            DomainConfig::StarShaped { radius } => Domain::star_shaped(parse_expr("radius", radius)?),
        }
    }
}

impl DiscretizationConfig {
    pub fn strategy(&self) -> Result<SamplingStrategy> {
        match (self.strategy, self.seed) {
            (StrategyName::Equidistant, None) => Ok(SamplingStrategy::Equidistant),
            (StrategyName::Sunflower, None) => Ok(SamplingStrategy::Sunflower),
            (StrategyName::UniformRandom, Some(seed)) => Ok(SamplingStrategy::UniformRandom { seed }),
            (StrategyName::UniformRandom, None) => {
                Err(Error::Config("strategy uniform_random needs a seed".into()))
            }
            (_, Some(_)) => Err(Error::Config("seed is only used by uniform_random".into())),
        }
    }
}

impl BoundaryConfig {
    fn operator_at(&self, domain: &Domain, point: &[f64]) -> Result<LinearDiffOperator> {
        let dim = domain.dim();
        match &self.operator {
            BoundaryOperatorConfig::Dirichlet => Ok(LinearDiffOperator::identity(dim)),
            BoundaryOperatorConfig::NormalDerivative => {
                let n = domain.outward_normal(point)?;
                let terms: Vec<_> = n
                    .iter()
                    .enumerate()
                    .map(|(axis, c)| (MultiIndex::unit(dim, axis), *c))
                    .collect();
                LinearDiffOperator::with_constants(dim, &terms)
            }
            BoundaryOperatorConfig::Terms(terms) => build_operator(dim, terms),
        }
    }
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn lengthscale_policy(&self) -> Result<LengthscalePolicy> {
        match (&self.kernel.ell, &self.kernel.ell_search) {
            (Some(l), None) => Ok(LengthscalePolicy::Fixed(*l)),
            (None, Some(search)) => {
                let dom = self.domain.build()?;
                let default = LengthscaleGrid::default_for(&dom)?;
                Ok(LengthscalePolicy::Search(LengthscaleGrid::new(
                    search.min.unwrap_or(default.min),
                    search.max.unwrap_or(default.max),
                    search.count.unwrap_or(default.count),
                    search.log_spaced.unwrap_or(default.log_spaced),
                )?))
            }
            _ => Err(Error::Config("kernel needs exactly one of `ell` and `ell_search`".into())),
        }
    }

    /// The problem this document describes. With a lengthscale search the
    /// kernel starts at the smallest grid value.
    pub fn to_spec(&self) -> Result<ProblemSpec> {
        let domain = self.domain.build()?;
        let dim = domain.dim();
        let operator = build_operator(dim, &self.operator.terms)?;
        let source = parse_expr("source", &self.source)?;

        let strategy = self.discretization.strategy()?;
        let interior = domain.sample_interior(self.discretization.n_i, strategy)?;
        let mut sampled: Option<Vec<Vec<f64>>> = None;
        let mut boundary = Vec::new();
        for entry in &self.boundary {
            let value = parse_expr("boundary value", &entry.value)?;
            let points = match (&entry.selector, &entry.point) {
                (Some(BoundarySelector::All), None) => match &sampled {
                    Some(p) => p.clone(),
                    None => sampled.insert(domain.sample_boundary(self.discretization.n_b)?).clone(),
                },
                (None, Some(p)) => vec![p.clone()],
                _ => {
                    return Err(Error::Config(
                        "each boundary entry needs exactly one of `where` and `point`".into(),
                    ))
                }
            };
            for point in points {
                let operator = entry.operator_at(&domain, &point)?;
                boundary.push(BoundaryDatum {
                    value: value.evaluate(&point)?,
                    point,
                    operator,
                });
            }
        }
        let discretization = Discretization { interior, boundary };
        discretization.validate(&domain)?;

        let ell = match self.lengthscale_policy()? {
            LengthscalePolicy::Fixed(l) => l,
            LengthscalePolicy::Search(grid) => grid.min,
        };
        let kernel = SeKernel::isotropic(self.kernel.s, ell, dim)?;
        ProblemSpec::new(domain, operator, source, discretization, kernel)
    }

    /// Copy with a different number of interior points.
    pub fn with_interior_count(&self, n_i: usize) -> Self {
        let mut c = self.clone();
        c.discretization.n_i = n_i;
        c
    }
}

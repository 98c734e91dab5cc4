//! A config resolved into a solvable problem: the [`ProblemSpec`], how to
//! pick the lengthscale, and an optional reference solution.

use crate::casebook::{fd_solve_heat1d, FdReference};
use crate::config::{LengthscalePolicy, OracleConfig, ProblemConfig};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::gp::{select_lengthscale, LengthscaleProfile, PosteriorField, ProblemSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum Oracle {
    Exact(Expression),
    FiniteDifference(FdReference),
}

impl Oracle {
    pub fn value_at(&self, x: &[f64]) -> Result<f64> {
        match self {
            Oracle::Exact(e) => e.evaluate(x),
            Oracle::FiniteDifference(fd) => match x {
                [t] => fd.value_at(*t),
                _ => Err(Error::DimensionMismatch {
                    expected: 1,
                    found: x.len(),
                }),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub config: ProblemConfig,
    pub spec: ProblemSpec,
    pub lengthscale: LengthscalePolicy,
    pub oracle: Option<Oracle>,
}

/// A conditioned problem and how its lengthscale was found.
#[derive(Debug, Clone)]
pub struct Solution {
    pub field: PosteriorField,
    pub lengthscale: f64,
    /// Present when the lengthscale came from a likelihood search.
    pub profile: Option<LengthscaleProfile>,
}

impl Problem {
    pub fn from_config(config: ProblemConfig) -> Result<Self> {
        let spec = config.to_spec()?;
        let lengthscale = config.lengthscale_policy()?;
        let oracle = match &config.oracle {
            None => None,
            Some(OracleConfig::Exact(src)) => Some(Oracle::Exact(
                Expression::parse(src).map_err(|e| Error::Config(format!("oracle `{src}`: {e}")))?,
            )),
            Some(OracleConfig::Heat1dFd { n }) => Some(Oracle::FiniteDifference(fd_solve_heat1d(*n)?)),
        };
        Ok(Problem {
            config,
            spec,
            lengthscale,
            oracle,
        })
    }

    pub fn solve(&self) -> Result<Solution> {
        let (lengthscale, profile) = match &self.lengthscale {
            LengthscalePolicy::Fixed(l) => (*l, None),
            LengthscalePolicy::Search(grid) => {
                let profile = select_lengthscale(&self.spec, &grid.values())?;
                (profile.best, Some(profile))
            }
        };
        let spec = self.spec.with_kernel(self.spec.kernel.with_lengthscale(lengthscale)?)?;
        Ok(Solution {
            field: PosteriorField::new(spec)?,
            lengthscale,
            profile,
        })
    }
}


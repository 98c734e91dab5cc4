//! Linear differential operators `L[u] = sum_alpha L_alpha(x) d^alpha u`.

use std::fmt;

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::kernel::SeKernel;

/// A `d`-tuple of derivative orders, one per coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    components: Vec<u32>,
}

impl MultiIndex {
    pub fn new(components: Vec<u32>) -> Self {
        MultiIndex { components }
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex::new(vec![0; dim])
    }

    /// First derivative along coordinate `axis` (zero-based).
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut c = vec![0; dim];
        c[axis] = 1;
        MultiIndex::new(c)
    }

    pub fn components(&self) -> &[u32] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// `|alpha| = alpha_1 + ... + alpha_d`.
    pub fn order(&self) -> u32 {
        self.components.iter().sum()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTerm {
    pub alpha: MultiIndex,
    pub coefficient: Expression,
}

impl OperatorTerm {
    pub fn new(alpha: MultiIndex, coefficient: Expression) -> Self {
        OperatorTerm { alpha, coefficient }
    }
}

/// A `k`-th order linear differential operator on `R^d`. Terms with equal
/// multi-indices are merged at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearDiffOperator {
    dim: usize,
    terms: Vec<OperatorTerm>,
}

impl LinearDiffOperator {
    pub fn new(dim: usize, terms: Vec<OperatorTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Config("an operator needs at least one term".into()));
        }
        let mut merged: Vec<OperatorTerm> = Vec::with_capacity(terms.len());
        for term in terms {
            if term.alpha.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: term.alpha.dim(),
                });
            }
            if term.coefficient.arity() > dim {
                return Err(Error::VariableOutOfRange {
                    index: term.coefficient.arity(),
                    dim,
                });
            }
            match merged.iter_mut().find(|t| t.alpha == term.alpha) {
                Some(existing) => existing.coefficient = existing.coefficient.add(&term.coefficient),
                None => merged.push(term),
            }
        }
        Ok(LinearDiffOperator { dim, terms: merged })
    }

    pub fn identity(dim: usize) -> Self {
        LinearDiffOperator {
            dim,
            terms: vec![OperatorTerm::new(MultiIndex::zero(dim), Expression::constant(1.0))],
        }
    }

    /// Operator with constant coefficients, e.g. `[((1,0), n1), ((0,1), n2)]`
    /// for a normal derivative.
    pub fn with_constants(dim: usize, terms: &[(MultiIndex, f64)]) -> Result<Self> {
        Self::new(
            dim,
            terms
                .iter()
                .map(|(a, c)| OperatorTerm::new(a.clone(), Expression::constant(*c)))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[OperatorTerm] {
        &self.terms
    }

    /// Highest `|alpha|` over the terms.
    pub fn order(&self) -> u32 {
        self.terms.iter().map(|t| t.alpha.order()).max().unwrap_or(0)
    }

    /// Freezes the coefficients at `x`.
    pub fn at(&self, x: &[f64]) -> Result<LocalOperator> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let terms = self
            .terms
            .iter()
            .map(|t| Ok((t.alpha.clone(), t.coefficient.evaluate(x)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(LocalOperator { terms })
    }
}

/// Outcome of comparing boundary and interior operator orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderCheck {
    Ok,
    /// The boundary operator is not at least one order below the interior one.
    /// Solving still proceeds.
    Warning { interior: u32, boundary: u32 },
}

pub fn check_boundary_order(
    interior: &LinearDiffOperator,
    boundary: &LinearDiffOperator,
) -> Result<OrderCheck> {
    if interior.dim() != boundary.dim() {
        return Err(Error::DimensionMismatch {
            expected: interior.dim(),
            found: boundary.dim(),
        });
    }
    let (li, lb) = (interior.order(), boundary.order());
    if lb < li {
        Ok(OrderCheck::Ok)
    } else {
        Ok(OrderCheck::Warning {
            interior: li,
            boundary: lb,
        })
    }
}

/// An operator whose coefficients have been evaluated at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    terms: Vec<(MultiIndex, f64)>,
}

impl LocalOperator {
    pub fn identity(dim: usize) -> Self {
        LocalOperator {
            terms: vec![(MultiIndex::zero(dim), 1.0)],
        }
    }

    pub fn terms(&self) -> &[(MultiIndex, f64)] {
        &self.terms
    }
}

/// `sum_alpha sum_beta A_alpha B_beta d^alpha d'^beta c(x, x')` for operators
/// already frozen at `x` and `x'`. With `op_b` absent the second argument is
/// left undifferentiated.
pub fn apply_local(
    op_a: &LocalOperator,
    op_b: Option<&LocalOperator>,
    kernel: &SeKernel,
    x: &[f64],
    xp: &[f64],
) -> Result<f64> {
    let zero = LocalOperator::identity(kernel.dim());
    let op_b = op_b.unwrap_or(&zero);
    let mut total = 0.0;
    for (alpha, ca) in &op_a.terms {
        for (beta, cb) in &op_b.terms {
            if *ca == 0.0 || *cb == 0.0 {
                continue;
            }
            total += ca * cb * kernel.eval_derivative(alpha, beta, x, xp)?;
        }
    }
    Ok(total)
}

/// Covariance between `A[u](x)` and `B[u](x')` under the prior `kernel`:
/// `A` acts on the first kernel argument and `B` (if given) on the second.
pub fn apply_to_kernel(
    op_a: &LinearDiffOperator,
    op_b: Option<&LinearDiffOperator>,
    kernel: &SeKernel,
    x: &[f64],
    xp: &[f64],
) -> Result<f64> {
    let a = op_a.at(x)?;
    let b = op_b.map(|op| op.at(xp)).transpose()?;
    apply_local(&a, b.as_ref(), kernel, x, xp)
}

//! Squared-exponential covariance and its mixed partial derivatives.
//!
//! With `t_r = (x_r - x'_r) / l_r` the kernel factorizes over coordinates,
//! `c(x, x') = s^2 prod_r exp(-t_r^2 / 2)`, and every mixed derivative has the
//! closed form
//!
//! ```text
//! d^a_x d^b_x' c = s^2 prod_r (-1)^{a_r} l_r^{-(a_r + b_r)} He_{a_r + b_r}(t_r) exp(-t_r^2 / 2)
//! ```
//!
//! where `He_n` is the probabilists' Hermite polynomial.

use crate::error::{Error, Result};
use crate::operators::MultiIndex;

/// Largest per-coordinate total order `a_r + b_r` accepted by
/// [`SeKernel::eval_derivative`].
pub const MAX_COORDINATE_ORDER: u32 = 8;

/// Probabilists' Hermite polynomial `He_n(t)` by the three-term recurrence
/// `He_{n+1} = t He_n - n He_{n-1}`.
pub fn hermite_he(n: u32, t: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, t);
    match n {
        0 => prev,
        _ => {
            for k in 1..n {
                let next = t * cur - f64::from(k) * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Stationary squared-exponential kernel with signal strength `s` and one
/// lengthscale per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct SeKernel {
    signal: f64,
    lengthscales: Vec<f64>,
}

impl SeKernel {
    pub fn new(signal: f64, lengthscales: Vec<f64>) -> Result<Self> {
        if !(signal.is_finite() && signal > 0.0) {
            return Err(Error::InvalidKernel(format!("signal strength must be positive, got {signal}")));
        }
        if !(1..=3).contains(&lengthscales.len()) {
            return Err(Error::InvalidKernel(format!(
                "dimension must be 1, 2 or 3, got {}",
                lengthscales.len()
            )));
        }
        if let Some(bad) = lengthscales.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::InvalidKernel(format!("lengthscales must be positive, got {bad}")));
        }
        Ok(SeKernel {
            signal,
            lengthscales,
        })
    }

    /// Kernel with the same lengthscale in every one of `dim` coordinates.
    pub fn isotropic(signal: f64, lengthscale: f64, dim: usize) -> Result<Self> {
        Self::new(signal, vec![lengthscale; dim])
    }

    pub fn signal(&self) -> f64 {
        self.signal
    }

    /// Prior variance `c(x, x) = s^2`.
    pub fn variance(&self) -> f64 {
        self.signal * self.signal
    }

    pub fn lengthscales(&self) -> &[f64] {
        &self.lengthscales
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    /// Copy of this kernel with every lengthscale replaced by `lengthscale`.
    pub fn with_lengthscale(&self, lengthscale: f64) -> Result<Self> {
        Self::isotropic(self.signal, lengthscale, self.dim())
    }

    fn check_points(&self, x: &[f64], xp: &[f64]) -> Result<()> {
        for p in [x, xp] {
            if p.len() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: p.len(),
                });
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64], xp: &[f64]) -> Result<f64> {
        self.check_points(x, xp)?;
        let q: f64 = x
            .iter()
            .zip(xp)
            .zip(&self.lengthscales)
            .map(|((a, b), l)| {
                let t = (a - b) / l;
                t * t
            })
            .sum();
        Ok(self.variance() * (-0.5 * q).exp())
    }

    /// `d^alpha` with respect to `x` of `d^beta` with respect to `x'` of `c(x, x')`.
    pub fn eval_derivative(
        &self,
        alpha: &MultiIndex,
        beta: &MultiIndex,
        x: &[f64],
        xp: &[f64],
    ) -> Result<f64> {
        self.check_points(x, xp)?;
        for m in [alpha, beta] {
            if m.dim() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: m.dim(),
                });
            }
        }
        let mut value = self.variance();
        for (r, l) in self.lengthscales.iter().enumerate() {
            let a = alpha.components()[r];
            let n = a + beta.components()[r];
            if n > MAX_COORDINATE_ORDER {
                return Err(Error::KernelOrder {
                    coordinate: r + 1,
                    order: n,
                    limit: MAX_COORDINATE_ORDER,
                });
            }
            let t = (x[r] - xp[r]) / l;
            let mut factor = hermite_he(n, t) * (-0.5 * t * t).exp() / l.powi(n as i32);
            if a % 2 == 1 {
                factor = -factor;
            }
            value *= factor;
        }
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(c: &[u32]) -> MultiIndex {
        MultiIndex::new(c.to_vec())
    }

    #[test]
    fn hermite_low_orders() {
        let t = 0.7_f64;
        assert_eq!(hermite_he(0, t), 1.0);
        assert_eq!(hermite_he(1, t), t);
        assert!((hermite_he(2, t) - (t * t - 1.0)).abs() < 1e-15);
        assert!((hermite_he(3, t) - (t.powi(3) - 3.0 * t)).abs() < 1e-15);
        assert!((hermite_he(4, t) - (t.powi(4) - 6.0 * t * t + 3.0)).abs() < 1e-14);
        assert_eq!(hermite_he(2, 0.0), -1.0);
        // He_8(0) = 105
        assert_eq!(hermite_he(8, 0.0), 105.0);
    }

    #[test]
    fn eval_matches_formula() {
        let k = SeKernel::isotropic(2.0, 0.3, 1).unwrap();
        assert_eq!(k.eval(&[1.2], &[1.2]).unwrap(), 4.0);

        let k = SeKernel::isotropic(1.0, 1.0, 1).unwrap();
        assert!((k.eval(&[0.0], &[1.0]).unwrap() - 0.606530659712633).abs() < 1e-15);

        let k = SeKernel::isotropic(0.1, 3.5, 2).unwrap();
        let expect = 0.01 * (-1.0 / (2.0 * 3.5 * 3.5_f64)).exp();
        assert!((k.eval(&[0.0, 0.0], &[1.0, 0.0]).unwrap() - expect).abs() < 1e-17);
    }

    #[test]
    fn low_order_derivatives_at_zero_separation() {
        let (s, l) = (1.7, 0.45);
        let k = SeKernel::isotropic(s, l, 1).unwrap();
        let x = [0.3];
        assert_eq!(
            k.eval_derivative(&mi(&[0]), &mi(&[0]), &x, &x).unwrap(),
            k.eval(&x, &x).unwrap()
        );
        let d11 = k.eval_derivative(&mi(&[1]), &mi(&[1]), &x, &x).unwrap();
        assert!((d11 - s * s / (l * l)).abs() < 1e-12);
        let d20 = k.eval_derivative(&mi(&[2]), &mi(&[0]), &x, &x).unwrap();
        assert!((d20 + s * s / (l * l)).abs() < 1e-12);
        let d10 = k.eval_derivative(&mi(&[1]), &mi(&[0]), &x, &x).unwrap();
        assert_eq!(d10, 0.0);
    }

    #[test]
    fn order_cap_is_enforced() {
        let k = SeKernel::isotropic(1.0, 1.0, 2).unwrap();
        let ok = k.eval_derivative(&mi(&[4, 0]), &mi(&[4, 1]), &[0.1, 0.2], &[0.0, 0.0]);
        assert!(ok.is_ok());
        let err = k.eval_derivative(&mi(&[5, 0]), &mi(&[4, 0]), &[0.1, 0.2], &[0.0, 0.0]);
        assert!(matches!(err, Err(Error::KernelOrder { coordinate: 1, order: 9, .. })));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SeKernel::new(0.0, vec![1.0]).is_err());
        assert!(SeKernel::new(1.0, vec![-1.0]).is_err());
        assert!(SeKernel::new(1.0, vec![]).is_err());
        assert!(SeKernel::new(1.0, vec![1.0; 4]).is_err());
        let k = SeKernel::isotropic(1.0, 1.0, 2).unwrap();
        assert!(matches!(k.eval(&[0.0], &[0.0, 1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn anisotropic_lengthscales_scale_each_axis() {
        let k = SeKernel::new(1.0, vec![1.0, 2.0]).unwrap();
        let a = k.eval(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        let b = k.eval(&[0.0, 0.0], &[0.0, 2.0]).unwrap();
        assert!((a - b).abs() < 1e-16);
    }
}

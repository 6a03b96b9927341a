//! Gaussian covariance kernels and their mixed derivatives.
//!
//! Both families are separable, `K(x, y) = prod_k exp(-w_k r_k^2)` with
//! `r = x - y`, so every derivative functional reduces to one-dimensional
//! derivatives of `exp(-w r^2)`:
//!
//! `d^n/dr^n exp(-w r^2) = (-sqrt(w))^n H_n(sqrt(w) r) exp(-w r^2)`
//!
//! where `H_n` are the physicists' Hermite polynomials. A derivative with
//! respect to the second argument picks up a factor `-1` per order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    /// `exp(-|x-y|^2 / (2 sigma^2))`
    GaussianIsotropic,
    /// `exp(-sum_k (x_k-y_k)^2 / sigma_k^2)`, no factor 1/2.
    GaussianAnisotropic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    lengthscales: Vec<f64>,
    dim: usize,
    // exponent weights w_k
    weights: Vec<f64>,
}

impl KernelSpec {
    pub fn isotropic(sigma: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("kernel dimension must be positive".into()));
        }
        check_lengthscale(sigma)?;
        let w = 1.0 / (2.0 * sigma * sigma);
        Ok(Self {
            family: KernelFamily::GaussianIsotropic,
            lengthscales: vec![sigma],
            dim,
            weights: vec![w; dim],
        })
    }

    pub fn anisotropic(lengthscales: &[f64]) -> Result<Self> {
        if lengthscales.is_empty() {
            return Err(Error::InvalidArgument("kernel dimension must be positive".into()));
        }
        for &s in lengthscales {
            check_lengthscale(s)?;
        }
        Ok(Self {
            family: KernelFamily::GaussianAnisotropic,
            lengthscales: lengthscales.to_vec(),
            dim: lengthscales.len(),
            weights: lengthscales.iter().map(|s| 1.0 / (s * s)).collect(),
        })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn lengthscales(&self) -> &[f64] {
        &self.lengthscales
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval_kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, y.len())?;
        Ok(self.envelope(x, y))
    }

    /// `L^x R^y K(x, y)`: `op_l` acts on the first argument, `op_r` on the second.
    pub fn eval_bilinear(&self, op_l: DerivativeOp, x: &[f64], op_r: DerivativeOp, y: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, y.len())?;
        let l = OpTerms::new(op_l, self.dim)?;
        let r = OpTerms::new(op_r, self.dim)?;
        Ok(self.bilinear_terms(&l, x, &r, y))
    }

    fn envelope(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in 0..self.dim {
            let r = x[k] - y[k];
            s += self.weights[k] * r * r;
        }
        (-s).exp()
    }

    // Unchecked hot path used by Gram assembly and prediction.
    pub(crate) fn bilinear_terms(&self, l: &OpTerms, x: &[f64], r: &OpTerms, y: &[f64]) -> f64 {
        let e = self.envelope(x, y);
        if l.is_identity() && r.is_identity() {
            return e;
        }
        let mut acc = 0.0;
        for a in &l.terms {
            for b in &r.terms {
                let mut v = a.coef * b.coef;
                if b.order % 2 == 1 {
                    v = -v;
                }
                if a.order == 0 && b.order == 0 {
                } else if a.order == 0 {
                    v *= self.axis_poly(b.order, b.axis, x, y);
                } else if b.order == 0 || a.axis == b.axis {
                    v *= self.axis_poly(a.order + b.order, a.axis, x, y);
                } else {
                    v *= self.axis_poly(a.order, a.axis, x, y) * self.axis_poly(b.order, b.axis, x, y);
                }
                acc += v;
            }
        }
        acc * e
    }

    // (-sqrt(w))^n H_n(sqrt(w) r)
    fn axis_poly(&self, n: u8, axis: usize, x: &[f64], y: &[f64]) -> f64 {
        let sw = self.weights[axis].sqrt();
        let u = sw * (x[axis] - y[axis]);
        let mut h0 = 1.0;
        if n == 0 {
            return 1.0;
        }
        let mut h1 = 2.0 * u;
        for k in 1..n as usize {
            let h2 = 2.0 * u * h1 - 2.0 * k as f64 * h0;
            h0 = h1;
            h1 = h2;
        }
        let s = if n % 2 == 1 { -1.0 } else { 1.0 };
        s * sw.powi(n as i32) * h1
    }
}

fn check_lengthscale(s: f64) -> Result<()> {
    if s.is_finite() && s > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("lengthscale must be positive and finite, got {s}")))
    }
}

/// A linear differential operator composed with point evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DerivativeOp {
    Identity,
    Partial(usize),
    SecondPartial(usize),
    Laplacian,
}

impl DerivativeOp {
    pub fn validate(self, dim: usize) -> Result<()> {
        match self {
            DerivativeOp::Partial(k) | DerivativeOp::SecondPartial(k) if k >= dim => Err(
                Error::UnsupportedOperator(format!("{self} on a {dim}-dimensional kernel")),
            ),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for DerivativeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivativeOp::Identity => write!(f, "id"),
            DerivativeOp::Partial(k) => write!(f, "d{k}"),
            DerivativeOp::SecondPartial(k) => write!(f, "d{k}d{k}"),
            DerivativeOp::Laplacian => write!(f, "lap"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Term {
    axis: usize,
    order: u8,
    coef: f64,
}

/// Expansion of an operator into single-axis derivative terms.
#[derive(Clone, Debug)]
pub(crate) struct OpTerms {
    terms: Vec<Term>,
}

impl OpTerms {
    pub(crate) fn new(op: DerivativeOp, dim: usize) -> Result<Self> {
        op.validate(dim)?;
        let t = |axis, order| Term { axis, order, coef: 1.0 };
        let terms = match op {
            DerivativeOp::Identity => vec![t(0, 0)],
            DerivativeOp::Partial(k) => vec![t(k, 1)],
            DerivativeOp::SecondPartial(k) => vec![t(k, 2)],
            DerivativeOp::Laplacian => (0..dim).map(|k| t(k, 2)).collect(),
        };
        Ok(Self { terms })
    }

    fn is_identity(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].order == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_values() {
        let k = KernelSpec::isotropic(0.2, 2).unwrap();
        assert_eq!(k.eval_kernel(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 1.0);
        let v = k.eval_kernel(&[0.0, 0.0], &[0.2, 0.0]).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
        let a = KernelSpec::anisotropic(&[1.0 / 20.0, 1.0 / 3.0]).unwrap();
        let v = a.eval_kernel(&[0.0, 0.0], &[1.0 / 20.0, 1.0 / 3.0]).unwrap();
        assert!((v - (-2.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn identity_pair_is_kernel() {
        let k = KernelSpec::isotropic(0.3, 2).unwrap();
        let (x, y) = ([0.1, 0.4], [0.5, 0.2]);
        let a = k.eval_bilinear(DerivativeOp::Identity, &x, DerivativeOp::Identity, &y).unwrap();
        assert_eq!(a, k.eval_kernel(&x, &y).unwrap());
    }

    #[test]
    fn laplacian_laplacian_at_zero() {
        // 8/sigma^4 in two dimensions
        let k = KernelSpec::isotropic(0.2, 2).unwrap();
        let x = [0.4, 0.6];
        let v = k.eval_bilinear(DerivativeOp::Laplacian, &x, DerivativeOp::Laplacian, &x).unwrap();
        assert!((v - 5000.0).abs() < 1e-9);
        let v = k.eval_bilinear(DerivativeOp::Laplacian, &x, DerivativeOp::Identity, &x).unwrap();
        assert!((v + 50.0).abs() < 1e-12);
    }

    #[test]
    fn first_derivative_closed_form() {
        let k = KernelSpec::isotropic(0.5, 1).unwrap();
        let (x, y) = ([0.3], [0.1]);
        let kv = k.eval_kernel(&x, &y).unwrap();
        let d = k.eval_bilinear(DerivativeOp::Partial(0), &x, DerivativeOp::Identity, &y).unwrap();
        assert!((d - (-(0.2) / 0.25 * kv)).abs() < 1e-15);
        let d2 = k.eval_bilinear(DerivativeOp::Identity, &x, DerivativeOp::Partial(0), &y).unwrap();
        assert!((d2 + d).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(KernelSpec::isotropic(0.0, 2).is_err());
        assert!(KernelSpec::isotropic(-1.0, 2).is_err());
        assert!(KernelSpec::anisotropic(&[0.1, f64::NAN]).is_err());
        let k = KernelSpec::isotropic(0.2, 2).unwrap();
        assert!(matches!(k.eval_kernel(&[0.0], &[0.0, 0.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            k.eval_bilinear(DerivativeOp::Partial(2), &[0.0, 0.0], DerivativeOp::Identity, &[0.0, 0.0]),
            Err(Error::UnsupportedOperator(_))
        ));
    }
}

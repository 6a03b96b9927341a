//! Viscous Burgers with initial datum `-sin(pi s)` via the Hopf integral.

use std::f64::consts::PI;

use super::quadrature::gauss_hermite;
use crate::error::{Error, Result};

/// Reusable Hopf-formula evaluator for a fixed viscosity and rule order.
#[derive(Clone, Debug)]
pub struct ColeHopf {
    nu: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ColeHopf {
    pub const DEFAULT_ORDER: usize = 100;

    pub fn new(nu: f64, order: usize) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::InvalidArgument(format!("viscosity must be positive, got {nu}")));
        }
        let (nodes, weights) = gauss_hermite(order)?;
        Ok(Self { nu, nodes, weights })
    }

    /// `u(s, t) = -int sin(pi(s-e)) f(s-e) G(e) de / int f(s-e) G(e) de`
    /// with `f(x) = exp(-cos(pi x) / (2 pi nu))` and `G` the heat kernel of
    /// variance `2 nu t`; `e = sqrt(4 nu t) y` turns `G` into `exp(-y^2)`.
    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        if t < 0.0 || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("time must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(-(PI * s).sin());
        }
        let c = (4.0 * self.nu * t).sqrt();
        let k = 1.0 / (2.0 * PI * self.nu);
        // shift exponents by their maximum to keep exp in range
        let expo = |y: f64| -(PI * (s - c * y)).cos() * k;
        let shift = self.nodes.iter().map(|&y| expo(y)).fold(f64::NEG_INFINITY, f64::max);
        let (mut num, mut den) = (0.0, 0.0);
        for (&y, &w) in self.nodes.iter().zip(&self.weights) {
            let f = w * (expo(y) - shift).exp();
            num += (PI * (s - c * y)).sin() * f;
            den += f;
        }
        Ok(-num / den)
    }
}

/// One-off evaluation; prefer [`ColeHopf`] for many points.
pub fn burgers_cole_hopf(s: f64, t: f64, nu: f64, order: usize) -> Result<f64> {
    ColeHopf::new(nu, order)?.eval(s, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetry_and_initial_data() {
        let ch = ColeHopf::new(0.02, 100).unwrap();
        for &t in &[0.0, 0.1, 0.5, 1.0] {
            assert!(ch.eval(0.0, t).unwrap().abs() < 1e-13);
        }
        for &s in &[-0.7, 0.2, 0.9] {
            assert!((ch.eval(s, 0.0).unwrap() + (PI * s).sin()).abs() < 1e-15);
        }
        assert!(ch.eval(0.1, -1.0).is_err());
    }

    #[test]
    fn boundary_values_vanish() {
        let ch = ColeHopf::new(0.02, 100).unwrap();
        for &t in &[0.05, 0.5, 1.0] {
            assert!(ch.eval(1.0, t).unwrap().abs() < 1e-10);
            assert!(ch.eval(-1.0, t).unwrap().abs() < 1e-10);
        }
    }
}

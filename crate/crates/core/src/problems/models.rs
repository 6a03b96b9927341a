//! Interior maps `P` of the four benchmarks with their eliminations.

use super::constraints::PointModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tau {
    Zero,
    Cubic,
}

impl Tau {
    pub fn eval(self, u: f64) -> f64 {
        match self {
            Tau::Zero => 0.0,
            Tau::Cubic => u * u * u,
        }
    }

    pub fn deriv(self, u: f64) -> f64 {
        match self {
            Tau::Zero => 0.0,
            Tau::Cubic => 3.0 * u * u,
        }
    }
}

/// `-Delta u + tau(u) = f`; slots `(u, Delta u)`.
#[derive(Clone, Copy, Debug)]
pub struct EllipticModel {
    pub tau: Tau,
}

impl PointModel for EllipticModel {
    fn arity(&self) -> usize {
        2
    }
    fn eliminated(&self) -> usize {
        1
    }
    fn residual(&self, v: &[f64]) -> f64 {
        -v[1] + self.tau.eval(v[0])
    }
    fn gradient(&self, v: &[f64], g: &mut [f64]) {
        g[0] = self.tau.deriv(v[0]);
        g[1] = -1.0;
    }
    fn solve(&self, v: &[f64], y: f64) -> f64 {
        self.tau.eval(v[0]) - y
    }
    fn solve_gradient(&self, v: &[f64], _y: f64, g: &mut [f64]) {
        g[0] = self.tau.deriv(v[0]);
        g[1] = 0.0;
    }
}

/// `u_t + u u_s - nu u_ss = 0`; slots `(u, u_t, u_s, u_ss)`.
/// With `square_v4` the viscous term is `nu u_ss^2` instead.
#[derive(Clone, Copy, Debug)]
pub struct BurgersModel {
    pub nu: f64,
    pub square_v4: bool,
}

impl BurgersModel {
    fn visc(&self, v4: f64) -> f64 {
        if self.square_v4 {
            self.nu * v4 * v4
        } else {
            self.nu * v4
        }
    }

    fn visc_deriv(&self, v4: f64) -> f64 {
        if self.square_v4 {
            2.0 * self.nu * v4
        } else {
            self.nu
        }
    }
}

impl PointModel for BurgersModel {
    fn arity(&self) -> usize {
        4
    }
    fn eliminated(&self) -> usize {
        1
    }
    fn residual(&self, v: &[f64]) -> f64 {
        v[1] + v[0] * v[2] - self.visc(v[3])
    }
    fn gradient(&self, v: &[f64], g: &mut [f64]) {
        g[0] = v[2];
        g[1] = 1.0;
        g[2] = v[0];
        g[3] = -self.visc_deriv(v[3]);
    }
    fn solve(&self, v: &[f64], y: f64) -> f64 {
        y + self.visc(v[3]) - v[0] * v[2]
    }
    fn solve_gradient(&self, v: &[f64], _y: f64, g: &mut [f64]) {
        g[0] = -v[2];
        g[1] = 0.0;
        g[2] = -v[0];
        g[3] = self.visc_deriv(v[3]);
    }
}

/// `|grad u|^2 - eps Delta u = f^2`; slots `(u, u_x1, u_x2, Delta u)`.
#[derive(Clone, Copy, Debug)]
pub struct EikonalModel {
    pub eps: f64,
}

impl PointModel for EikonalModel {
    fn arity(&self) -> usize {
        4
    }
    fn eliminated(&self) -> usize {
        3
    }
    fn residual(&self, v: &[f64]) -> f64 {
        v[1] * v[1] + v[2] * v[2] - self.eps * v[3]
    }
    fn gradient(&self, v: &[f64], g: &mut [f64]) {
        g[0] = 0.0;
        g[1] = 2.0 * v[1];
        g[2] = 2.0 * v[2];
        g[3] = -self.eps;
    }
    fn solve(&self, v: &[f64], y: f64) -> f64 {
        (v[1] * v[1] + v[2] * v[2] - y) / self.eps
    }
    fn solve_gradient(&self, v: &[f64], _y: f64, g: &mut [f64]) {
        g[0] = 0.0;
        g[1] = 2.0 * v[1] / self.eps;
        g[2] = 2.0 * v[2] / self.eps;
        g[3] = 0.0;
    }
}

/// `-exp(a) (Delta u + grad a . grad u) = f`;
/// slots `(u, u_x1, u_x2, Delta u, a, a_x1, a_x2)`.
#[derive(Clone, Copy, Debug)]
pub struct DarcyModel;

impl PointModel for DarcyModel {
    fn arity(&self) -> usize {
        7
    }
    fn eliminated(&self) -> usize {
        3
    }
    fn residual(&self, v: &[f64]) -> f64 {
        -v[4].exp() * (v[3] + v[5] * v[1] + v[6] * v[2])
    }
    fn gradient(&self, v: &[f64], g: &mut [f64]) {
        let e = v[4].exp();
        g[0] = 0.0;
        g[1] = -e * v[5];
        g[2] = -e * v[6];
        g[3] = -e;
        g[4] = -e * (v[3] + v[5] * v[1] + v[6] * v[2]);
        g[5] = -e * v[1];
        g[6] = -e * v[2];
    }
    fn solve(&self, v: &[f64], y: f64) -> f64 {
        -y * (-v[4]).exp() - (v[5] * v[1] + v[6] * v[2])
    }
    fn solve_gradient(&self, v: &[f64], y: f64, g: &mut [f64]) {
        g[0] = 0.0;
        g[1] = -v[5];
        g[2] = -v[6];
        g[3] = 0.0;
        g[4] = y * (-v[4]).exp();
        g[5] = -v[1];
        g[6] = -v[2];
    }
}

//! Benchmark problems: operators, interior/boundary maps, data and truths.

pub mod constraints;
pub mod models;

use std::f64::consts::PI;
use std::sync::Arc;

pub use constraints::{ConstraintSystem, PointModel, Row, RowKind, Sparse};
pub use models::{BurgersModel, DarcyModel, EikonalModel, EllipticModel, Tau};

use crate::error::{Error, Result};
use crate::functionals::{BoxDomain, CollocationSet, FunctionalVector};
use crate::kernels::DerivativeOp::{self, *};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Problem {
    /// `-Delta u + tau(u) = f` on the unit square, `u = 0` on the boundary.
    Elliptic { tau: Tau },
    /// Viscous Burgers in `(s, t)`, data `-sin(pi s)` at `t = 0`.
    Burgers { nu: f64, square_v4: bool },
    /// Regularised Eikonal `|grad u|^2 - eps Delta u = 1`, `u = 0` on the boundary.
    Eikonal { eps: f64 },
    /// Recover `a` in `-div(exp(a) grad u) = 1` from `n_obs` noisy values of `u`.
    Darcy { gamma: f64, n_obs: usize },
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub problem: Problem,
    pub domain: BoxDomain,
    /// Operators on `u`; the first `q_b` act at every point.
    pub ops: Vec<DerivativeOp>,
    pub q_b: usize,
    /// Operators on the coefficient field (inverse problem only), all at every point.
    pub coef_ops: Vec<DerivativeOp>,
}

pub fn elliptic_spec(tau: Tau) -> ProblemSpec {
    ProblemSpec {
        problem: Problem::Elliptic { tau },
        domain: BoxDomain::unit_square(),
        ops: vec![Identity, Laplacian],
        q_b: 1,
        coef_ops: vec![],
    }
}

/// Coordinates are `(s, t)`: axis 0 is space, axis 1 is time.
pub fn burgers_spec(nu: f64, square_v4: bool) -> Result<ProblemSpec> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidArgument(format!("viscosity must be positive, got {nu}")));
    }
    Ok(ProblemSpec {
        problem: Problem::Burgers { nu, square_v4 },
        domain: BoxDomain::burgers(),
        ops: vec![Identity, Partial(1), Partial(0), SecondPartial(0)],
        q_b: 1,
        coef_ops: vec![],
    })
}

pub fn eikonal_spec(eps: f64) -> Result<ProblemSpec> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("eikonal eps must be positive, got {eps}")));
    }
    Ok(ProblemSpec {
        problem: Problem::Eikonal { eps },
        domain: BoxDomain::unit_square(),
        ops: vec![Identity, Partial(0), Partial(1), Laplacian],
        q_b: 1,
        coef_ops: vec![],
    })
}

pub fn darcy_ip_spec(gamma: f64, n_obs: usize) -> Result<ProblemSpec> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise level must be positive, got {gamma}")));
    }
    if n_obs == 0 {
        return Err(Error::InvalidArgument("need at least one observation".into()));
    }
    Ok(ProblemSpec {
        problem: Problem::Darcy { gamma, n_obs },
        domain: BoxDomain::unit_square(),
        ops: vec![Identity, Partial(0), Partial(1), Laplacian],
        q_b: 1,
        coef_ops: vec![Identity, Partial(0), Partial(1)],
    })
}

/// Functional vectors, their offsets in the joint vector `z`, and the
/// constraint rows for one collocation set.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub fields: Vec<FunctionalVector>,
    pub offsets: Vec<usize>,
    pub system: ConstraintSystem,
    /// Collocation indices carrying observations (inverse problem only).
    pub obs_points: Vec<usize>,
}

impl Discretization {
    pub fn n(&self) -> usize {
        self.system.n()
    }

    /// Slice of `z` belonging to field `k`.
    pub fn field<'a>(&self, z: &'a [f64], k: usize) -> &'a [f64] {
        let end = self.offsets.get(k + 1).copied().unwrap_or(z.len());
        &z[self.offsets[k]..end]
    }
}

impl ProblemSpec {
    pub fn name(&self) -> &'static str {
        match self.problem {
            Problem::Elliptic { .. } => "elliptic",
            Problem::Burgers { .. } => "burgers",
            Problem::Eikonal { .. } => "eikonal",
            Problem::Darcy { .. } => "darcy",
        }
    }

    pub fn model(&self) -> Arc<dyn PointModel> {
        match self.problem {
            Problem::Elliptic { tau } => Arc::new(EllipticModel { tau }),
            Problem::Burgers { nu, square_v4 } => Arc::new(BurgersModel { nu, square_v4 }),
            Problem::Eikonal { eps } => Arc::new(EikonalModel { eps }),
            Problem::Darcy { .. } => Arc::new(DarcyModel),
        }
    }

    /// Right-hand side `y_m` at an interior point.
    pub fn interior_data(&self, x: &[f64]) -> f64 {
        match self.problem {
            Problem::Elliptic { tau } => {
                let (s1, s4) = elliptic_modes(x);
                2.0 * PI * PI * s1 + 128.0 * PI * PI * s4 + tau.eval(s1 + 4.0 * s4)
            }
            Problem::Burgers { .. } => 0.0,
            // f = 1, and the interior map matches f^2
            Problem::Eikonal { .. } => 1.0,
            Problem::Darcy { .. } => 1.0,
        }
    }

    /// Boundary value `g` at a boundary point.
    pub fn boundary_data(&self, x: &[f64]) -> f64 {
        match self.problem {
            Problem::Burgers { .. } if x[1] == 0.0 && x[0].abs() < 1.0 => -(PI * x[0]).sin(),
            _ => 0.0,
        }
    }

    pub fn discretize(&self, pts: &CollocationSet, obs: Option<&[f64]>) -> Result<Discretization> {
        if pts.dim() != self.domain.dim() {
            return Err(Error::DimensionMismatch { expected: self.domain.dim(), got: pts.dim() });
        }
        let m = pts.m();
        let mi = pts.m_interior();
        let model = self.model();
        let fv_u = FunctionalVector::build(&self.ops, self.q_b, pts)?;
        match self.problem {
            Problem::Darcy { n_obs, .. } => {
                if n_obs > mi {
                    return Err(Error::InvalidArgument(format!(
                        "observation index out of range: {n_obs} observations but {mi} interior points"
                    )));
                }
                let obs = obs.ok_or_else(|| Error::InvalidArgument("inverse problem needs observations".into()))?;
                if obs.len() != n_obs {
                    return Err(Error::DimensionMismatch { expected: n_obs, got: obs.len() });
                }
                let obs_points: Vec<usize> = (0..n_obs).collect();
                let fv_u = fv_u.with_leading_block(Identity, obs_points.clone())?;
                let fv_a = FunctionalVector::build(&self.coef_ops, self.coef_ops.len(), pts)?;
                let na = fv_u.len();
                let mut rows = Vec::with_capacity(m + n_obs);
                for i in 0..mi {
                    let mut slots: Vec<usize> = (1..5).map(|b| fv_u.index_of(b, i)).collect();
                    slots.extend((0..3).map(|b| na + fv_a.index_of(b, i)));
                    rows.push(Row { kind: RowKind::Interior, slots, target: self.interior_data(pts.point(i)) });
                }
                for i in mi..m {
                    rows.push(Row { kind: RowKind::Boundary, slots: vec![fv_u.index_of(1, i)], target: 0.0 });
                }
                for (k, &o) in obs.iter().enumerate() {
                    rows.push(Row { kind: RowKind::Observation, slots: vec![fv_u.index_of(0, k)], target: o });
                }
                let n = na + fv_a.len();
                Ok(Discretization {
                    fields: vec![fv_u, fv_a],
                    offsets: vec![0, na],
                    system: ConstraintSystem::new(n, rows, model),
                    obs_points,
                })
            }
            _ => {
                let q = self.ops.len();
                let mut rows = Vec::with_capacity(m);
                for i in 0..mi {
                    let slots = (0..q).map(|b| fv_u.index_of(b, i)).collect();
                    rows.push(Row { kind: RowKind::Interior, slots, target: self.interior_data(pts.point(i)) });
                }
                for i in mi..m {
                    rows.push(Row {
                        kind: RowKind::Boundary,
                        slots: vec![fv_u.index_of(0, i)],
                        target: self.boundary_data(pts.point(i)),
                    });
                }
                let n = fv_u.len();
                Ok(Discretization {
                    fields: vec![fv_u],
                    offsets: vec![0],
                    system: ConstraintSystem::new(n, rows, model),
                    obs_points: vec![],
                })
            }
        }
    }
}

fn elliptic_modes(x: &[f64]) -> (f64, f64) {
    let s1 = (PI * x[0]).sin() * (PI * x[1]).sin();
    let s4 = (4.0 * PI * x[0]).sin() * (4.0 * PI * x[1]).sin();
    (s1, s4)
}

/// `u*(x) = sin(pi x1) sin(pi x2) + 4 sin(4 pi x1) sin(4 pi x2)`.
pub fn elliptic_truth(x: &[f64]) -> f64 {
    let (s1, s4) = elliptic_modes(x);
    s1 + 4.0 * s4
}

/// `L u*(x)` for the manufactured elliptic solution.
pub fn elliptic_truth_op(op: DerivativeOp, x: &[f64]) -> f64 {
    // each mode is c sin(k pi x1) sin(k pi x2)
    let mode = |c: f64, k: f64| {
        let w = k * PI;
        let (sx, cx) = (w * x[0]).sin_cos();
        let (sy, cy) = (w * x[1]).sin_cos();
        c * match op {
            Identity => sx * sy,
            Partial(0) => w * cx * sy,
            Partial(_) => w * sx * cy,
            SecondPartial(_) => -w * w * sx * sy,
            Laplacian => -2.0 * w * w * sx * sy,
        }
    };
    mode(1.0, 1.0) + mode(4.0, 4.0)
}

/// Stacked functional values of `u*` in the order of `fv`.
pub fn elliptic_truth_vector(fv: &FunctionalVector) -> Vec<f64> {
    (0..fv.len())
        .map(|n| {
            let (op, p) = fv.entry(n);
            elliptic_truth_op(op, fv.point(p))
        })
        .collect()
}

/// True coefficient `a*` with `exp(a*) = exp(S) + exp(-S)`, `S = sin 2 pi x1 + sin 2 pi x2`.
pub fn darcy_true_log_coefficient(x: &[f64]) -> f64 {
    let s = (2.0 * PI * x[0]).sin() + (2.0 * PI * x[1]).sin();
    // log(e^s + e^-s) = |s| + log(1 + e^{-2|s|})
    s.abs() + (-2.0 * s.abs()).exp().ln_1p()
}

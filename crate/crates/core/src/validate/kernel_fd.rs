//! Nested central finite differences of Gaussian kernels in double-double
//! arithmetic. Independent of the closed-form Hermite evaluator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dd::Dd;
use crate::kernels::{DerivativeOp, KernelFamily, KernelSpec};

const D1: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D2: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];

fn weights(spec: &KernelSpec) -> Vec<f64> {
    match spec.family() {
        KernelFamily::GaussianIsotropic => {
            let s = spec.lengthscales()[0];
            vec![0.5 / (s * s); spec.dim()]
        }
        KernelFamily::GaussianAnisotropic => spec.lengthscales().iter().map(|s| 1.0 / (s * s)).collect(),
    }
}

// (axis, order) pieces of an operator
fn pieces(op: DerivativeOp, dim: usize) -> Vec<(usize, u8)> {
    match op {
        DerivativeOp::Identity => vec![(0, 0)],
        DerivativeOp::Partial(k) => vec![(k, 1)],
        DerivativeOp::SecondPartial(k) => vec![(k, 2)],
        DerivativeOp::Laplacian => (0..dim).map(|k| (k, 2)).collect(),
    }
}

// (integer offset, integer weight) pairs of a 5-point stencil
fn stencil(order: u8) -> Vec<(f64, f64)> {
    match order {
        0 => vec![(0.0, 1.0)],
        1 => (0..5).map(|i| (i as f64 - 2.0, D1[i])).filter(|p| p.1 != 0.0).collect(),
        _ => (0..5).map(|i| (i as f64 - 2.0, D2[i])).collect(),
    }
}

fn kernel_dd(w: &[f64], x: &[Dd], y: &[Dd]) -> Dd {
    let mut s = Dd::ZERO;
    for k in 0..w.len() {
        let r = x[k] - y[k];
        s = s + (r * r).scale(w[k]);
    }
    (-s).exp()
}

/// Finite-difference approximation of `L^x R^y K(x, y)` with step `h`.
pub fn fd_bilinear(spec: &KernelSpec, op_l: DerivativeOp, x: &[f64], op_r: DerivativeOp, y: &[f64], h: f64) -> f64 {
    let d = spec.dim();
    let w = weights(spec);
    let mut total = 0.0;
    for (ax, ox) in pieces(op_l, d) {
        for (ay, oy) in pieces(op_r, d) {
            let mut acc = Dd::ZERO;
            let mut xs: Vec<Dd> = x.iter().map(|&v| Dd::new(v)).collect();
            let mut ys: Vec<Dd> = y.iter().map(|&v| Dd::new(v)).collect();
            for (cx, wx) in stencil(ox) {
                xs[ax] = Dd::new(x[ax]) + Dd::prod(cx, h);
                for (cy, wy) in stencil(oy) {
                    ys[ay] = Dd::new(y[ay]) + Dd::prod(cy, h);
                    acc = acc + kernel_dd(&w, &xs, &ys).scale(wx * wy);
                }
                ys[ay] = Dd::new(y[ay]);
            }
            let denom = |o: u8| if o == 0 { 1.0 } else { 12.0 * h.powi(o as i32) };
            total += acc.to_f64() / (denom(ox) * denom(oy));
        }
    }
    total
}

/// Largest error over random probes, each scaled by
/// `max(|fd|, sqrt(|L L K(x,x)| |R R K(y,y)|))`.
pub struct FdCheck {
    pub probes: usize,
    pub worst: f64,
    pub worst_case: String,
}

pub fn ops_for(dim: usize) -> Vec<DerivativeOp> {
    let mut ops = vec![DerivativeOp::Identity, DerivativeOp::Laplacian];
    for k in 0..dim {
        ops.push(DerivativeOp::Partial(k));
        ops.push(DerivativeOp::SecondPartial(k));
    }
    ops
}

/// Compare `eval` against finite differences on `probes` random configurations.
pub fn check_against_fd<F>(spec: &KernelSpec, probes: usize, seed: u64, h: f64, eval: F) -> FdCheck
where
    F: Fn(DerivativeOp, &[f64], DerivativeOp, &[f64]) -> f64,
{
    let d = spec.dim();
    let ops = ops_for(d);
    let ls: Vec<f64> = (0..d).map(|k| spec.lengthscales()[k.min(spec.lengthscales().len() - 1)]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = FdCheck { probes, worst: 0.0, worst_case: String::new() };
    for p in 0..probes {
        let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        // second point within a couple of lengthscales; every 10th probe coincident
        let y: Vec<f64> = if p % 10 == 0 {
            x.clone()
        } else {
            (0..d).map(|k| x[k] + ls[k] * rng.random_range(-1.5..1.5)).collect()
        };
        let a = ops[rng.random_range(0..ops.len())];
        let b = ops[rng.random_range(0..ops.len())];
        let fd = fd_bilinear(spec, a, &x, b, &y, h);
        let sa = fd_bilinear(spec, a, &x, a, &x, h).abs();
        let sb = fd_bilinear(spec, b, &y, b, &y, h).abs();
        let scale = fd.abs().max((sa * sb).sqrt());
        let err = (eval(a, &x, b, &y) - fd).abs() / scale;
        if !(err <= out.worst) {
            out.worst = err;
            out.worst_case = format!("{a} at {x:?}, {b} at {y:?}");
        }
    }
    out
}

//! Five-point finite-difference solvers on the unit square.
//!
//! `n` is the number of cells per axis: nodes sit at `i / n`, `i = 0..=n`,
//! and the `(n-1)^2` interior nodes are unknowns. Systems are symmetric
//! positive definite and solved with Jacobi-preconditioned CG.

use std::io::Write;

use crate::error::{Error, Result};

/// Nodal values on the `(n+1) x (n+1)` grid of the unit square, x fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceGrid {
    n: usize,
    values: Vec<f64>,
}

impl ReferenceGrid {
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("grid needs at least 2 cells per axis, got {n}")));
        }
        if values.len() != (n + 1) * (n + 1) {
            return Err(Error::DimensionMismatch { expected: (n + 1) * (n + 1), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Oracle("non-finite nodal value".into()));
        }
        Ok(Self { n, values })
    }

    pub fn cells(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.n + 1) + i]
    }

    pub fn coord(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }

    /// Bilinear interpolation; points outside the square are clamped.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let n = self.n as f64;
        let loc = |v: f64| {
            let s = (v.clamp(0.0, 1.0) * n).min(n);
            let i = (s.floor() as usize).min(self.n - 1);
            (i, s - i as f64)
        };
        let (i, fx) = loc(x[0]);
        let (j, fy) = loc(x[1]);
        let v00 = self.node(i, j);
        let v10 = self.node(i + 1, j);
        let v01 = self.node(i, j + 1);
        let v11 = self.node(i + 1, j + 1);
        (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(self.n, self.values.iter().map(|&v| f(v)).collect())
    }

    /// CSV with columns `x0,x1,value`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x0", "x1", "value"])?;
        for j in 0..=self.n {
            for i in 0..=self.n {
                wr.write_record(&[
                    format!("{:e}", self.coord(i)),
                    format!("{:e}", self.coord(j)),
                    format!("{:e}", self.node(i, j)),
                ])?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// Symmetric five-point operator on the `m x m` interior unknowns.
struct FivePoint {
    m: usize,
    diag: Vec<f64>,
    // coupling to the east (i+1) and north (j+1) neighbour; zero at the edge
    east: Vec<f64>,
    north: Vec<f64>,
}

impl FivePoint {
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let m = self.m;
        for j in 0..m {
            for i in 0..m {
                let k = j * m + i;
                let mut v = self.diag[k] * x[k];
                if i + 1 < m {
                    v += self.east[k] * x[k + 1];
                }
                if i > 0 {
                    v += self.east[k - 1] * x[k - 1];
                }
                if j + 1 < m {
                    v += self.north[k] * x[k + m];
                }
                if j > 0 {
                    v += self.north[k - m] * x[k - m];
                }
                y[k] = v;
            }
        }
    }

    /// Jacobi-preconditioned CG to `|r| <= tol |b|`.
    fn solve(&self, b: &[f64], tol: f64) -> Result<Vec<f64>> {
        let nn = b.len();
        let bnorm = norm(b);
        let mut x = vec![0.0; nn];
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&self.diag).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; nn];
        let mut rz = dot(&r, &z);
        let max_iter = 20 * nn.max(100);
        for _ in 0..max_iter {
            self.apply(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for k in 0..nn {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            if norm(&r) <= tol * bnorm {
                // confirm with the true residual
                self.apply(&x, &mut ap);
                let res: f64 = b.iter().zip(&ap).map(|(b, a)| (b - a) * (b - a)).sum::<f64>().sqrt();
                if res <= tol * bnorm {
                    return Ok(x);
                }
            }
            for k in 0..nn {
                z[k] = r[k] / self.diag[k];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..nn {
                p[k] = z[k] + beta * p[k];
            }
        }
        Err(Error::Oracle(format!("CG did not reach relative residual {tol:e}")))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub const FD_TOL: f64 = 1e-10;

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidArgument(format!("grid needs at least 2 cells per axis, got {n}")))
    } else {
        Ok(())
    }
}

// Assemble with face conductances k(i,j) between nodes, scatter into a full grid.
fn solve_conductance(
    n: usize,
    face_x: impl Fn(usize, usize) -> f64,
    face_y: impl Fn(usize, usize) -> f64,
    reaction: impl Fn(usize, usize) -> f64,
    source: impl Fn(usize, usize) -> f64,
    boundary: impl Fn(usize, usize) -> f64,
) -> Result<ReferenceGrid> {
    check_n(n)?;
    let m = n - 1;
    let h2 = 1.0 / (n * n) as f64;
    let mut op = FivePoint { m, diag: vec![0.0; m * m], east: vec![0.0; m * m], north: vec![0.0; m * m] };
    let mut b = vec![0.0; m * m];
    for j in 1..n {
        for i in 1..n {
            let k = (j - 1) * m + (i - 1);
            // face_x(i, j): between nodes (i, j) and (i+1, j)
            let (kw, ke) = (face_x(i - 1, j) / h2, face_x(i, j) / h2);
            let (ks, kn) = (face_y(i, j - 1) / h2, face_y(i, j) / h2);
            op.diag[k] = kw + ke + ks + kn + reaction(i, j);
            b[k] = source(i, j);
            if i + 1 < n {
                op.east[k] = -ke;
            } else {
                b[k] += ke * boundary(n, j);
            }
            if i == 1 {
                b[k] += kw * boundary(0, j);
            }
            if j + 1 < n {
                op.north[k] = -kn;
            } else {
                b[k] += kn * boundary(i, n);
            }
            if j == 1 {
                b[k] += ks * boundary(i, 0);
            }
        }
    }
    let x = op.solve(&b, FD_TOL)?;
    let mut values = vec![0.0; (n + 1) * (n + 1)];
    for j in 0..=n {
        for i in 0..=n {
            values[j * (n + 1) + i] = if i == 0 || j == 0 || i == n || j == n {
                boundary(i, j)
            } else {
                x[(j - 1) * m + (i - 1)]
            };
        }
    }
    ReferenceGrid::from_values(n, values)
}

/// `-Delta u = f`, `u = g` on the boundary.
pub fn fd_poisson(f: impl Fn(&[f64]) -> f64, g: impl Fn(&[f64]) -> f64, n: usize) -> Result<ReferenceGrid> {
    let c = |i: usize| i as f64 / n as f64;
    solve_conductance(n, |_, _| 1.0, |_, _| 1.0, |_, _| 0.0, |i, j| f(&[c(i), c(j)]), |i, j| g(&[c(i), c(j)]))
}

/// `-div(exp(a) grad u) = f`, `u = 0` on the boundary, with nodal `a` and
/// harmonic-mean face coefficients.
pub fn darcy_forward_fd(a: &ReferenceGrid, f: impl Fn(&[f64]) -> f64, n: usize) -> Result<ReferenceGrid> {
    if a.cells() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.cells() });
    }
    let k = |i: usize, j: usize| a.node(i, j).exp();
    let hm = |p: f64, q: f64| 2.0 * p * q / (p + q);
    let c = |i: usize| i as f64 / n as f64;
    solve_conductance(
        n,
        |i, j| hm(k(i, j), k(i + 1, j)),
        |i, j| hm(k(i, j), k(i, j + 1)),
        |_, _| 0.0,
        |i, j| f(&[c(i), c(j)]),
        |_, _| 0.0,
    )
}

/// Sample a function at the nodes of an `n`-cell grid.
pub fn sample_grid(f: impl Fn(&[f64]) -> f64, n: usize) -> Result<ReferenceGrid> {
    check_n(n)?;
    let c = |i: usize| i as f64 / n as f64;
    let mut values = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            values.push(f(&[c(i), c(j)]));
        }
    }
    ReferenceGrid::from_values(n, values)
}

/// `u = -eps log v` with `v - eps^2 Delta v = 0`, `v = 1` on the boundary (f = 1).
pub fn eikonal_reference(eps: f64, n: usize) -> Result<ReferenceGrid> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eikonal eps must be positive, got {eps}")));
    }
    let e2 = eps * eps;
    let v = solve_conductance(n, |_, _| e2, |_, _| e2, |_, _| 1.0, |_, _| 0.0, |_, _| 1.0)?;
    if v.values().iter().any(|&x| x <= 0.0) {
        return Err(Error::Oracle("transformed eikonal solution lost positivity".into()));
    }
    v.map(|x| -eps * x.ln())
}

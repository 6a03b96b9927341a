//! Pointwise constraint maps `F(z) = y`, their elimination `z = Fbar(w)` and
//! sparse Jacobians.

use std::sync::Arc;

use crate::error::{check_dim, Result};

/// Algebraic PDE relation at one interior point.
///
/// `v` holds the local functional values in the order the row lists them.
/// Slot `eliminated()` can be solved for in closed form.
pub trait PointModel: Send + Sync {
    fn arity(&self) -> usize;
    fn eliminated(&self) -> usize;
    fn residual(&self, v: &[f64]) -> f64;
    fn gradient(&self, v: &[f64], g: &mut [f64]);
    /// Value of `v[eliminated]` for which `residual(v) = y`.
    fn solve(&self, v: &[f64], y: f64) -> f64;
    /// Derivatives of `solve` with respect to every slot (zero at the eliminated slot).
    fn solve_gradient(&self, v: &[f64], y: f64, g: &mut [f64]);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    /// `z[slot] = g`
    Boundary,
    /// `P(z[slots]) = f`
    Interior,
    /// `z[slot] ~ o`, penalised, never eliminated
    Observation,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub kind: RowKind,
    pub slots: Vec<usize>,
    pub target: f64,
}

/// Sparse matrix stored as lists of `(index, value)` per row or per column.
pub type Sparse = Vec<Vec<(usize, f64)>>;

#[derive(Clone)]
pub struct ConstraintSystem {
    n: usize,
    rows: Vec<Row>,
    model: Arc<dyn PointModel>,
    free: Vec<usize>,
    free_pos: Vec<Option<usize>>,
}

impl std::fmt::Debug for ConstraintSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConstraintSystem")
            .field("n", &self.n)
            .field("rows", &self.rows.len())
            .field("free", &self.free.len())
            .finish()
    }
}

impl ConstraintSystem {
    pub fn new(n: usize, rows: Vec<Row>, model: Arc<dyn PointModel>) -> Self {
        let mut is_free = vec![true; n];
        for r in &rows {
            match r.kind {
                RowKind::Boundary => is_free[r.slots[0]] = false,
                RowKind::Interior => is_free[r.slots[model.eliminated()]] = false,
                RowKind::Observation => {}
            }
        }
        let free: Vec<usize> = (0..n).filter(|&i| is_free[i]).collect();
        let mut free_pos = vec![None; n];
        for (p, &i) in free.iter().enumerate() {
            free_pos[i] = Some(p);
        }
        Self { n, rows, model, free, free_pos }
    }

    /// Length of the full vector `z`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn model(&self) -> &dyn PointModel {
        self.model.as_ref()
    }

    /// Indices of `z` that stay free after elimination.
    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn targets(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.target).collect()
    }

    pub fn count(&self, kind: RowKind) -> usize {
        self.rows.iter().filter(|r| r.kind == kind).count()
    }

    fn local(&self, r: &Row, z: &[f64]) -> Vec<f64> {
        r.slots.iter().map(|&s| z[s]).collect()
    }

    /// `F(z)`, one entry per row.
    pub fn residual(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, z.len())?;
        Ok(self
            .rows
            .iter()
            .map(|r| match r.kind {
                RowKind::Interior => self.model.residual(&self.local(r, z)),
                _ => z[r.slots[0]],
            })
            .collect())
    }

    /// `grad F(z)` by rows.
    pub fn jacobian(&self, z: &[f64]) -> Result<Sparse> {
        check_dim(self.n, z.len())?;
        let mut g = vec![0.0; self.model.arity()];
        Ok(self
            .rows
            .iter()
            .map(|r| match r.kind {
                RowKind::Interior => {
                    self.model.gradient(&self.local(r, z), &mut g);
                    r.slots.iter().copied().zip(g.iter().copied()).collect()
                }
                _ => vec![(r.slots[0], 1.0)],
            })
            .collect())
    }

    /// Scatter free variables into `z` and fill the eliminated entries.
    pub fn complete(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.free.len(), w.len())?;
        let mut z = vec![0.0; self.n];
        for (&i, &v) in self.free.iter().zip(w) {
            z[i] = v;
        }
        let e = self.model.eliminated();
        for r in &self.rows {
            match r.kind {
                RowKind::Boundary => z[r.slots[0]] = r.target,
                RowKind::Interior => {
                    let v = self.local(r, &z);
                    z[r.slots[e]] = self.model.solve(&v, r.target);
                }
                RowKind::Observation => {}
            }
        }
        Ok(z)
    }

    /// `d Fbar / d w` by columns (one column per free variable).
    pub fn complete_jacobian(&self, w: &[f64]) -> Result<Sparse> {
        let z = self.complete(w)?;
        let mut cols: Sparse = (0..self.free.len()).map(|p| vec![(self.free[p], 1.0)]).collect();
        let e = self.model.eliminated();
        let mut g = vec![0.0; self.model.arity()];
        for r in self.rows.iter().filter(|r| r.kind == RowKind::Interior) {
            self.model.solve_gradient(&self.local(r, &z), r.target, &mut g);
            let out = r.slots[e];
            for (k, &s) in r.slots.iter().enumerate() {
                if k == e {
                    continue;
                }
                if let Some(p) = self.free_pos[s] {
                    cols[p].push((out, g[k]));
                }
            }
        }
        Ok(cols)
    }

    /// Free part of a full vector.
    pub fn restrict(&self, z: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| z[i]).collect()
    }
}

//! Gauss-Newton iteration in the `Theta^{-1}` metric.
//!
//! Each outer step linearises the constraints at the current iterate and
//! solves the resulting quadratic problem exactly. Two interchangeable routes
//! are provided:
//!
//! * `NormalEquations`: minimise `|L^{-1}(z0 + J d)|^2 + soft penalties` over
//!   the step `d`, forming `B = L^{-1} J` and `H = B^T B + ...`.
//! * `Constrained`: the same minimiser written as
//!   `z = Theta_eta C^T (C Theta_eta C^T + W)^{-1} r` with `C` the constraint Jacobian
//!   and `W` the diagonal of soft-row weights (zero for hard rows).
//!   It only factors a matrix the size of the number of constraint rows.

mod representation;

pub use representation::SolutionRepresentation;

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::gram::{col_mut, factorize_owned, GramSystem};
use crate::parallel::{self, Parallelism};
use crate::problems::{Discretization, RowKind};

#[derive(Clone, Debug, PartialEq)]
pub enum Init {
    /// i.i.d. `N(0, scale^2)` entries.
    GaussianRandom { scale: f64, seed: u64 },
    Zero,
    Given(Vec<f64>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerRoute {
    #[default]
    Constrained,
    NormalEquations,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    /// Every PDE and boundary row eliminated.
    Eliminate,
    /// Every row penalised with weight `beta^-2`.
    Relax { beta: f64 },
    /// Boundary rows eliminated, interior rows penalised.
    Mixed { beta: f64 },
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Eliminate => "eliminate",
            Mode::Relax { .. } => "relax",
            Mode::Mixed { .. } => "mixed",
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match *self {
            Mode::Eliminate => None,
            Mode::Relax { beta } | Mode::Mixed { beta } => Some(beta),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GnConfig {
    pub max_iters: usize,
    pub alpha: f64,
    pub init: Init,
    /// Stop when `|loss change| < loss_tol * loss`.
    pub loss_tol: f64,
    /// Stop when `|step| < step_tol * |iterate|`; such a step is not counted.
    pub step_tol: f64,
    pub route: InnerRoute,
    pub par: Parallelism,
}

impl Default for GnConfig {
    fn default() -> Self {
        Self {
            max_iters: 10,
            alpha: 1.0,
            init: Init::GaussianRandom { scale: 1.0, seed: 0 },
            loss_tol: 1e-12,
            step_tol: 1e-8,
            route: InnerRoute::default(),
            par: Parallelism::default(),
        }
    }
}

impl GnConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!("step size must be in (0, 1], got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Eliminated Gauss-Newton for a forward problem.
pub fn gauss_newton_eliminated(gram: &GramSystem, disc: &Discretization, cfg: &GnConfig) -> Result<SolutionRepresentation> {
    Ok(run(&[gram], disc, Mode::Eliminate, None, cfg)?.remove(0))
}

/// Relaxed (or mixed) Gauss-Newton for a forward problem.
pub fn gauss_newton_relaxed(gram: &GramSystem, disc: &Discretization, mode: Mode, cfg: &GnConfig) -> Result<SolutionRepresentation> {
    if mode == Mode::Eliminate {
        return gauss_newton_eliminated(gram, disc, cfg);
    }
    Ok(run(&[gram], disc, mode, None, cfg)?.remove(0))
}

/// Joint `(u, a)` recovery with observation rows penalised by `gamma^-2`.
pub fn gauss_newton_ip(
    gram_u: &GramSystem,
    gram_a: &GramSystem,
    disc: &Discretization,
    gamma: f64,
    cfg: &GnConfig,
) -> Result<(SolutionRepresentation, SolutionRepresentation)> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("noise level must be positive, got {gamma}")));
    }
    let mut out = run(&[gram_u, gram_a], disc, Mode::Eliminate, Some(gamma), cfg)?;
    let a = out.pop().unwrap();
    Ok((out.pop().unwrap(), a))
}

/// General driver: one Gram system per field of `disc`.
pub fn run(
    grams: &[&GramSystem],
    disc: &Discretization,
    mode: Mode,
    gamma: Option<f64>,
    cfg: &GnConfig,
) -> Result<Vec<SolutionRepresentation>> {
    cfg.validate()?;
    let engine = Engine::new(grams, disc, mode, gamma, cfg)?;
    let (z, history, iterations, converged) = engine.iterate()?;
    grams
        .iter()
        .enumerate()
        .map(|(f, g)| {
            let zf = disc.field(&z, f).to_vec();
            let c = g.factor().solve(&zf)?;
            Ok(SolutionRepresentation {
                coefficients: c,
                functionals: g.functionals().clone(),
                kernel: g.kernel().clone(),
                z: zf,
                loss_history: history.clone(),
                iterations,
                converged,
            })
        })
        .collect()
}

struct Engine<'a> {
    grams: &'a [&'a GramSystem],
    disc: &'a Discretization,
    mode: Mode,
    cfg: &'a GnConfig,
    // per-row soft weight (variance); 0 for hard rows
    weights: Vec<f64>,
    // coordinates pinned by hard boundary rows in mixed mode
    pinned: Vec<bool>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl<'a> Engine<'a> {
    fn new(grams: &'a [&'a GramSystem], disc: &'a Discretization, mode: Mode, gamma: Option<f64>, cfg: &'a GnConfig) -> Result<Self> {
        check_dim(disc.fields.len(), grams.len())?;
        for (f, g) in grams.iter().enumerate() {
            check_dim(disc.fields[f].len(), g.dim())?;
        }
        let beta2 = match mode.beta() {
            Some(b) if b > 0.0 && b.is_finite() => b * b,
            Some(b) => return Err(Error::InvalidArgument(format!("penalty beta must be positive, got {b}"))),
            None => 0.0,
        };
        let sys = &disc.system;
        let mut weights = Vec::with_capacity(sys.rows().len());
        for r in sys.rows() {
            weights.push(match (r.kind, mode) {
                (RowKind::Observation, _) => {
                    let g = gamma.ok_or_else(|| Error::InvalidArgument("observation rows need a noise level".into()))?;
                    g * g
                }
                (_, Mode::Eliminate) => 0.0,
                (RowKind::Boundary, Mode::Mixed { .. }) => 0.0,
                _ => beta2,
            });
        }
        let mut pinned = vec![false; sys.n()];
        if let Mode::Mixed { .. } = mode {
            for r in sys.rows().iter().filter(|r| r.kind == RowKind::Boundary) {
                pinned[r.slots[0]] = true;
            }
        }
        Ok(Self { grams, disc, mode, cfg, weights, pinned })
    }

    fn n(&self) -> usize {
        self.disc.system.n()
    }

    fn param_dim(&self) -> usize {
        match self.mode {
            Mode::Eliminate => self.disc.system.free().len(),
            _ => self.n(),
        }
    }

    // full vector from the iteration variable
    fn expand(&self, p: &[f64]) -> Result<Vec<f64>> {
        match self.mode {
            Mode::Eliminate => self.disc.system.complete(p),
            _ => Ok(p.to_vec()),
        }
    }

    fn initial(&self) -> Result<Vec<f64>> {
        let k = self.param_dim();
        let mut p = match &self.cfg.init {
            Init::Zero => vec![0.0; k],
            Init::Given(w) => {
                check_dim(k, w.len())?;
                w.clone()
            }
            Init::GaussianRandom { scale, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..k).map(|_| scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)).collect()
            }
        };
        if let Mode::Mixed { .. } = self.mode {
            for r in self.disc.system.rows().iter().filter(|r| r.kind == RowKind::Boundary) {
                p[r.slots[0]] = r.target;
            }
        }
        Ok(p)
    }

    fn loss(&self, z: &[f64]) -> Result<f64> {
        let mut s = 0.0;
        for (f, g) in self.grams.iter().enumerate() {
            s += g.factor().quad_form(self.disc.field(z, f))?;
        }
        let fz = self.disc.system.residual(z)?;
        for ((r, w), v) in self.disc.system.rows().iter().zip(&self.weights).zip(fz) {
            if *w > 0.0 {
                let e = v - r.target;
                s += e * e / w;
            }
        }
        Ok(s)
    }

    fn iterate(&self) -> Result<(Vec<f64>, Vec<f64>, usize, bool)> {
        let mut p = self.initial()?;
        let mut z = self.expand(&p)?;
        let mut loss = self.loss(&z)?;
        if !loss.is_finite() {
            return Err(Error::Divergence { iteration: 0 });
        }
        let mut history = vec![loss];
        let mut iters = 0;
        let mut converged = false;
        while iters < self.cfg.max_iters {
            let target = self.step(&p, &z, iters + 1)?;
            let delta: Vec<f64> = target.iter().zip(&p).map(|(t, q)| t - q).collect();
            if !delta.iter().all(|d| d.is_finite()) {
                return Err(Error::Divergence { iteration: iters + 1 });
            }
            if norm(&delta) <= self.cfg.step_tol * norm(&p).max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
            for (q, d) in p.iter_mut().zip(&delta) {
                *q += self.cfg.alpha * d;
            }
            iters += 1;
            z = self.expand(&p)?;
            let new_loss = self.loss(&z)?;
            if !new_loss.is_finite() {
                return Err(Error::Divergence { iteration: iters });
            }
            history.push(new_loss);
            let change = (new_loss - loss).abs();
            loss = new_loss;
            if change < self.cfg.loss_tol * loss.abs() {
                converged = true;
                break;
            }
        }
        Ok((z, history, iters, converged))
    }

    /// Minimiser of the linearised problem, in iteration variables.
    fn step(&self, p: &[f64], z: &[f64], iteration: usize) -> Result<Vec<f64>> {
        match self.cfg.route {
            InnerRoute::Constrained => {
                let znew = self.constrained_solve(z, iteration)?;
                Ok(match self.mode {
                    Mode::Eliminate => self.disc.system.restrict(&znew),
                    _ => znew,
                })
            }
            InnerRoute::NormalEquations => {
                let d = self.normal_equations_step(p, z, iteration)?;
                Ok(p.iter().zip(&d).map(|(a, b)| a + b).collect())
            }
        }
    }

    fn field_of(&self, j: usize) -> (usize, usize) {
        let offs = &self.disc.offsets;
        let f = offs.partition_point(|&o| o <= j) - 1;
        (f, j - offs[f])
    }

    // z = Theta_eta C^T (C Theta_eta C^T + W)^{-1} r
    fn constrained_solve(&self, z: &[f64], iteration: usize) -> Result<Vec<f64>> {
        let sys = &self.disc.system;
        let c = sys.jacobian(z)?;
        let fz = sys.residual(z)?;
        let rows = sys.rows();
        let r: Vec<f64> = (0..rows.len())
            .map(|i| rows[i].target - fz[i] + c[i].iter().map(|&(j, v)| v * z[j]).sum::<f64>())
            .collect();
        let n = self.n();
        let nr = rows.len();
        let mut s = Mat::<f64>::zeros(n, nr);
        parallel::for_each_column(self.cfg.par, s.as_mut(), |i, col| {
            for &(j, v) in &c[i] {
                let (f, lj) = self.field_of(j);
                let g = self.grams[f];
                let off = self.disc.offsets[f];
                let th = g.theta().col(lj).try_as_col_major().expect("contiguous column").as_slice();
                for k in 0..g.dim() {
                    col[off + k] += v * th[k];
                }
                col[j] += v * g.regularization()[lj];
            }
        });
        let mut gm = Mat::<f64>::zeros(nr, nr);
        parallel::for_each_column(self.cfg.par, gm.as_mut(), |i, col| {
            let si = s.col(i).try_as_col_major().expect("contiguous column").as_slice();
            for (k, ck) in c.iter().enumerate().skip(i) {
                col[k] = ck.iter().map(|&(j, v)| v * si[j]).sum();
            }
            col[i] += self.weights[i];
        });
        let fac = factorize_owned(gm, self.cfg.par).map_err(|_| Error::SingularStep { iteration })?;
        let mut lambda = r;
        fac.solve_in_place(col_mut(&mut lambda), Parallelism::Serial);
        let mut out = vec![0.0; n];
        faer::linalg::matmul::matmul(
            col_mut(&mut out),
            faer::Accum::Replace,
            s.as_ref(),
            crate::gram::col_ref(&lambda),
            1.0,
            self.cfg.par.faer(),
        );
        Ok(out)
    }

    // affine parametrisation z = z0 + J d of the search space: for each
    // column of J, the iteration variable it moves and its entries in z
    fn parametrisation(&self, p: &[f64]) -> Result<Vec<(usize, Vec<(usize, f64)>)>> {
        Ok(match self.mode {
            Mode::Eliminate => self.disc.system.complete_jacobian(p)?.into_iter().enumerate().collect(),
            _ => (0..self.n()).filter(|&j| !self.pinned[j]).map(|j| (j, vec![(j, 1.0)])).collect(),
        })
    }

    // argmin_d |L^{-1}(z + J d)|^2 + sum_soft w_i^{-1} (F_i(z) + C_i J d - y_i)^2
    fn normal_equations_step(&self, p: &[f64], z: &[f64], iteration: usize) -> Result<Vec<f64>> {
        let par = self.cfg.par;
        let sys = &self.disc.system;
        let jac = self.parametrisation(p)?;
        let k = jac.len();
        let n = self.n();
        let mut jd = Mat::<f64>::zeros(n, k);
        for (col, (_, entries)) in jac.iter().enumerate() {
            for &(i, v) in entries {
                jd[(i, col)] += v;
            }
        }
        // soft rows: (C J) scaled by w^{-1/2}, and scaled residuals
        let c = sys.jacobian(z)?;
        let fz = sys.residual(z)?;
        let soft: Vec<usize> = (0..c.len()).filter(|&i| self.weights[i] > 0.0).collect();
        let mut cj = Mat::<f64>::zeros(soft.len(), k);
        let mut res = vec![0.0; soft.len()];
        for (a, &i) in soft.iter().enumerate() {
            let w = self.weights[i].sqrt();
            res[a] = (fz[i] - sys.rows()[i].target) / w;
            for &(j, v) in &c[i] {
                for col in 0..k {
                    let x = jd[(j, col)];
                    if x != 0.0 {
                        cj[(a, col)] += v * x / w;
                    }
                }
            }
        }
        // B = L^{-1} J and b = L^{-1} z, field by field
        let mut b = z.to_vec();
        for (f, g) in self.grams.iter().enumerate() {
            let off = self.disc.offsets[f];
            let nf = g.dim();
            g.factor().half_solve_in_place(jd.as_mut().subrows_mut(off, nf), par);
            g.factor().half_solve_in_place(col_mut(&mut b[off..off + nf]), Parallelism::Serial);
        }
        let mut h = Mat::<f64>::zeros(k, k);
        let fpar = par.faer();
        faer::linalg::matmul::matmul(h.as_mut(), faer::Accum::Replace, jd.transpose(), jd.as_ref(), 1.0, fpar);
        let mut g = vec![0.0; k];
        faer::linalg::matmul::matmul(col_mut(&mut g), faer::Accum::Replace, jd.transpose(), crate::gram::col_ref(&b), 1.0, fpar);
        if !soft.is_empty() {
            faer::linalg::matmul::matmul(h.as_mut(), faer::Accum::Add, cj.transpose(), cj.as_ref(), 1.0, fpar);
            faer::linalg::matmul::matmul(col_mut(&mut g), faer::Accum::Add, cj.transpose(), crate::gram::col_ref(&res), 1.0, fpar);
        }
        let fac = factorize_owned(h, par).map_err(|_| Error::SingularStep { iteration })?;
        fac.solve_in_place(col_mut(&mut g), Parallelism::Serial);
        let mut delta = vec![0.0; p.len()];
        for ((target, _), v) in jac.iter().zip(&g) {
            delta[*target] = -v;
        }
        Ok(delta)
    }
}

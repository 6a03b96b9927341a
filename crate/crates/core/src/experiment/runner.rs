//! Single runs: sample, assemble, solve, evaluate.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, InitName, PointMode, ProblemName};
use crate::error::{Error, Result};
use crate::functionals::{grid_collocation, sample_collocation, CollocationSet};
use crate::gram::GramSystem;
use crate::parallel::{self, Parallelism};
use crate::problems::{darcy_true_log_coefficient, elliptic_truth, Discretization};
use crate::reference::{darcy_forward_fd, eikonal_reference, error_from_values, sample_grid, test_grid, ColeHopf};
use crate::solver::{self, GnConfig, Init, SolutionRepresentation};

/// One row of a results table. Column order is the field order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "M_omega")]
    pub m_omega: usize,
    pub seed: u64,
    /// Lengthscales joined with `;`.
    pub sigma: String,
    pub eta: f64,
    pub beta: Option<f64>,
    pub mode: String,
    pub nugget: String,
    pub iters: usize,
    pub converged: bool,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub l2_error: f64,
    pub linf_error: f64,
    pub wall_seconds: f64,
    pub status: String,
    pub config_hash: String,
}

impl RunRecord {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    fn blank(cfg: &ExperimentConfig) -> Self {
        let mode = cfg.solver_mode();
        Self {
            problem: cfg.problem.as_str().into(),
            m: cfg.m,
            m_omega: cfg.resolved_m_omega(),
            seed: cfg.seed,
            sigma: cfg.resolved_sigma().iter().map(|s| format!("{s}")).collect::<Vec<_>>().join(";"),
            eta: cfg.resolved_eta(),
            beta: mode.beta(),
            mode: mode.name().into(),
            nugget: match cfg.nugget {
                crate::gram::NuggetKind::Adaptive => "adaptive".into(),
                crate::gram::NuggetKind::Standard => "standard".into(),
            },
            iters: 0,
            converged: false,
            initial_loss: f64::NAN,
            final_loss: f64::NAN,
            l2_error: f64::NAN,
            linf_error: f64::NAN,
            wall_seconds: 0.0,
            status: "ok".into(),
            config_hash: cfg.hash(),
        }
    }

    fn fill(&mut self, sol: &SolutionRepresentation, l2: f64, linf: f64) {
        self.iters = sol.iterations;
        self.converged = sol.converged;
        self.initial_loss = sol.loss_history.first().copied().unwrap_or(f64::NAN);
        self.final_loss = sol.loss_history.last().copied().unwrap_or(f64::NAN);
        self.l2_error = l2;
        self.linf_error = linf;
    }
}

/// Reference values of the target field on the interior test grid.
#[derive(Clone, Debug)]
pub struct TruthGrid {
    pub n: usize,
    /// Flat, stride 2.
    pub points: Vec<f64>,
    pub values: Vec<f64>,
}

/// Truth for the configured problem: the solution `u`, or `a` for the inverse problem.
pub fn truth_grid(cfg: &ExperimentConfig) -> Result<TruthGrid> {
    let spec = cfg.problem_spec()?;
    let points = test_grid(spec.domain.lo(), spec.domain.hi(), cfg.test_grid);
    let values = match cfg.problem {
        ProblemName::Elliptic => points.chunks(2).map(elliptic_truth).collect(),
        ProblemName::Burgers => {
            let ch = ColeHopf::new(cfg.nu, cfg.quad_order)?;
            points.chunks(2).map(|x| ch.eval(x[0], x[1])).collect::<Result<_>>()?
        }
        ProblemName::Eikonal => {
            let r = eikonal_reference(cfg.eps, cfg.fd_n)?;
            points.chunks(2).map(|x| r.interpolate(x)).collect()
        }
        ProblemName::Darcy => points.chunks(2).map(darcy_true_log_coefficient).collect(),
    };
    Ok(TruthGrid { n: cfg.test_grid, points, values })
}

pub fn collocation(cfg: &ExperimentConfig) -> Result<CollocationSet> {
    let spec = cfg.problem_spec()?;
    match cfg.points {
        PointMode::Random => sample_collocation(&spec.domain, cfg.m, cfg.resolved_m_omega(), cfg.seed),
        PointMode::Grid => grid_collocation(&spec.domain, cfg.m),
    }
}

pub fn gn_config(cfg: &ExperimentConfig, par: Parallelism) -> GnConfig {
    GnConfig {
        max_iters: cfg.max_iters,
        alpha: 1.0,
        init: match cfg.init {
            InitName::Random => Init::GaussianRandom { scale: cfg.init_scale, seed: cfg.seed },
            InitName::Zero => Init::Zero,
        },
        loss_tol: cfg.loss_tol,
        step_tol: cfg.step_tol,
        route: cfg.route,
        par,
    }
}

pub fn parallelism(cfg: &ExperimentConfig) -> Parallelism {
    if cfg.parallel {
        Parallelism::default()
    } else {
        Parallelism::Serial
    }
}

/// Everything a forward solve produces.
pub struct ForwardSolve {
    pub points: CollocationSet,
    pub disc: Discretization,
    pub gram: GramSystem,
    pub solution: SolutionRepresentation,
}

pub fn solve_forward(cfg: &ExperimentConfig, par: Parallelism) -> Result<ForwardSolve> {
    if cfg.problem == ProblemName::Darcy {
        return Err(Error::InvalidArgument("the inverse problem runs through darcy-ip".into()));
    }
    cfg.validate()?;
    let points = collocation(cfg)?;
    let disc = cfg.problem_spec()?.discretize(&points, None)?;
    let gram = GramSystem::new(&cfg.kernel()?, &disc.fields[0], cfg.nugget, cfg.resolved_eta(), par)?;
    let solution = solver::run(&[&gram], &disc, cfg.solver_mode(), None, &gn_config(cfg, par))?.remove(0);
    Ok(ForwardSolve { points, disc, gram, solution })
}

/// Solve and score against the reference; failures land in `status`.
pub fn run_solve(cfg: &ExperimentConfig) -> RunRecord {
    match truth_grid(cfg) {
        Ok(t) => run_solve_with(cfg, &t, parallelism(cfg)),
        Err(e) => failed(cfg, &e),
    }
}

fn failed(cfg: &ExperimentConfig, e: &Error) -> RunRecord {
    RunRecord { status: e.status().into(), ..RunRecord::blank(cfg) }
}

pub fn run_solve_with(cfg: &ExperimentConfig, truth: &TruthGrid, par: Parallelism) -> RunRecord {
    if cfg.problem == ProblemName::Darcy {
        return run_darcy_ip_with(cfg, truth, par).map(|o| o.record).unwrap_or_else(|e| failed(cfg, &e));
    }
    let start = Instant::now();
    let mut rec = RunRecord::blank(cfg);
    let out = solve_forward(cfg, par).and_then(|f| {
        let pred = f.solution.evaluate_many(&truth.points, par)?;
        let (l2, linf) = error_from_values(&pred, &truth.values)?;
        Ok((f.solution, l2, linf))
    });
    match out {
        Ok((sol, l2, linf)) => rec.fill(&sol, l2, linf),
        Err(e) => rec.status = e.status().into(),
    }
    rec.m_omega = if cfg.points == PointMode::Grid { collocation(cfg).map(|p| p.m_interior()).unwrap_or(0) } else { rec.m_omega };
    if cfg.timing {
        rec.wall_seconds = start.elapsed().as_secs_f64();
    }
    rec
}

/// Collocation points and noisy observations of `u` at the first `n_obs` interior points.
pub fn darcy_observations(cfg: &ExperimentConfig) -> Result<(CollocationSet, Vec<f64>)> {
    let points = collocation(cfg)?;
    if cfg.n_obs > points.m_interior() {
        return Err(Error::InvalidArgument(format!(
            "{} observations but only {} interior points",
            cfg.n_obs,
            points.m_interior()
        )));
    }
    let a = sample_grid(darcy_true_log_coefficient, cfg.fd_n)?;
    let u = darcy_forward_fd(&a, |_| 1.0, cfg.fd_n)?;
    let noise = cfg.obs_noise.unwrap_or(cfg.gamma);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // separate stream from the collocation sampler
    rng.set_stream(1);
    let obs = (0..cfg.n_obs)
        .map(|i| {
            let e: f64 = StandardNormal.sample(&mut rng);
            u.interpolate(points.point(i)) + noise * e
        })
        .collect();
    Ok((points, obs))
}

#[derive(Clone, Debug)]
pub struct DarcyOutcome {
    pub record: RunRecord,
    /// `|u(x_i) - o_i|_2` over the observations.
    pub misfit: f64,
    /// Relative discrete L2 error of the recovered `a`.
    pub a_rel_error: f64,
    /// Same quantity for the zero field.
    pub zero_rel_error: f64,
    pub grid: TruthGrid,
    pub u_recovered: Vec<f64>,
    pub a_recovered: Vec<f64>,
}

pub fn run_darcy_ip(cfg: &ExperimentConfig) -> Result<DarcyOutcome> {
    let truth = truth_grid(cfg)?;
    run_darcy_ip_with(cfg, &truth, parallelism(cfg))
}

pub fn run_darcy_ip_with(cfg: &ExperimentConfig, truth: &TruthGrid, par: Parallelism) -> Result<DarcyOutcome> {
    if cfg.problem != ProblemName::Darcy {
        return Err(Error::InvalidArgument(format!("darcy-ip needs problem = darcy, got {}", cfg.problem.as_str())));
    }
    cfg.validate()?;
    let start = Instant::now();
    let (points, obs) = darcy_observations(cfg)?;
    let disc = cfg.problem_spec()?.discretize(&points, Some(&obs))?;
    let kernel = cfg.kernel()?;
    let gram_u = GramSystem::new(&kernel, &disc.fields[0], cfg.nugget, cfg.resolved_eta(), par)?;
    let gram_a = GramSystem::new(&kernel, &disc.fields[1], cfg.nugget, cfg.eta_coef, par)?;
    let (u, a) = solver::gauss_newton_ip(&gram_u, &gram_a, &disc, cfg.gamma, &gn_config(cfg, par))?;

    let misfit = obs
        .iter()
        .enumerate()
        .map(|(i, o)| u.evaluate(points.point(i)).map(|v| (v - o).powi(2)))
        .sum::<Result<f64>>()?
        .sqrt();
    let a_rec = a.evaluate_many(&truth.points, par)?;
    let u_rec = u.evaluate_many(&truth.points, par)?;
    let (l2, linf) = error_from_values(&a_rec, &truth.values)?;
    let zeros = vec![0.0; truth.values.len()];
    let (scale, _) = error_from_values(&zeros, &truth.values)?;

    let mut record = RunRecord::blank(cfg);
    record.fill(&a, l2, linf);
    if cfg.timing {
        record.wall_seconds = start.elapsed().as_secs_f64();
    }
    Ok(DarcyOutcome {
        record,
        misfit,
        a_rel_error: l2 / scale,
        zero_rel_error: scale / scale,
        grid: truth.clone(),
        u_recovered: u_rec,
        a_recovered: a_rec,
    })
}

/// Run `cells` on at most `jobs` threads (each cell single-threaded), in order.
pub fn run_cells<T: Send>(jobs: usize, n: usize, cell: impl Fn(usize) -> T + Send + Sync) -> Vec<T> {
    #[cfg(feature = "parallel")]
    if jobs > 1 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            return pool.install(|| parallel::collect(Parallelism::Rayon, n, &cell));
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
    parallel::collect(Parallelism::Serial, n, cell)
}

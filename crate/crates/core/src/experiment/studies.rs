//! Batch studies over `M`, seeds and nugget levels.

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ModeName, PointMode, ProblemName};
use super::runner::{run_cells, run_solve_with, truth_grid, RunRecord};
use crate::error::{Error, Result};
use crate::gram::NuggetKind;
use crate::parallel::Parallelism;
use crate::problems::{elliptic_truth, Tau};
use crate::reference::{error_from_values, fd_poisson};

/// Per-`M` aggregate over the successful repetitions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub problem: String,
    #[serde(rename = "M")]
    pub m: usize,
    pub mode: String,
    pub runs: usize,
    pub failed: usize,
    pub mean_l2: f64,
    pub min_l2: f64,
    pub max_l2: f64,
    pub mean_linf: f64,
    pub min_linf: f64,
    pub max_linf: f64,
    pub mean_iters: f64,
}

fn summarize(m: usize, records: &[RunRecord]) -> SummaryRow {
    let ok: Vec<&RunRecord> = records.iter().filter(|r| r.ok()).collect();
    let stats = |f: fn(&RunRecord) -> f64| {
        if ok.is_empty() {
            return (f64::NAN, f64::NAN, f64::NAN);
        }
        let v: Vec<f64> = ok.iter().map(|r| f(r)).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        (mean, v.iter().copied().fold(f64::INFINITY, f64::min), v.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    };
    let (mean_l2, min_l2, max_l2) = stats(|r| r.l2_error);
    let (mean_linf, min_linf, max_linf) = stats(|r| r.linf_error);
    let (mean_iters, _, _) = stats(|r| r.iters as f64);
    SummaryRow {
        problem: records.first().map(|r| r.problem.clone()).unwrap_or_default(),
        m,
        mode: records.first().map(|r| r.mode.clone()).unwrap_or_default(),
        runs: records.len(),
        failed: records.len() - ok.len(),
        mean_l2,
        min_l2,
        max_l2,
        mean_linf,
        min_linf,
        max_linf,
        mean_iters,
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceStudy {
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
}

/// `reps` seeded runs (seeds `seed, seed+1, ...`) for every `M` in `m_list`.
pub fn run_convergence_study(cfg: &ExperimentConfig) -> Result<ConvergenceStudy> {
    cfg.validate()?;
    if cfg.m_list.is_empty() {
        return Err(Error::InvalidArgument("m_list is empty".into()));
    }
    let truth = truth_grid(cfg)?;
    let cells: Vec<ExperimentConfig> = cfg
        .m_list
        .iter()
        .flat_map(|&m| (0..cfg.reps as u64).map(move |r| (m, r)))
        .map(|(m, r)| ExperimentConfig { seed: cfg.seed + r, ..cfg.with_m(m) })
        .collect();
    let records = run_cells(cfg.jobs, cells.len(), |i| run_solve_with(&cells[i], &truth, Parallelism::Serial));
    let summary = records.chunks(cfg.reps).zip(&cfg.m_list).map(|(rs, &m)| summarize(m, rs)).collect();
    Ok(ConvergenceStudy { records, summary })
}

/// Every `eta` in `eta_list` with both nugget kinds (adaptive first), elliptic only.
pub fn run_nugget_study(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    if cfg.problem != ProblemName::Elliptic {
        return Err(Error::InvalidArgument("the nugget study is defined for the elliptic problem".into()));
    }
    let truth = truth_grid(cfg)?;
    let cells: Vec<ExperimentConfig> = cfg
        .eta_list
        .iter()
        .flat_map(|&eta| {
            [NuggetKind::Adaptive, NuggetKind::Standard]
                .map(|nugget| ExperimentConfig { eta, eta_small: None, nugget, ..cfg.clone() })
        })
        .collect();
    Ok(run_cells(cfg.jobs, cells.len(), |i| run_solve_with(&cells[i], &truth, Parallelism::Serial)))
}

/// Linear elliptic problem on uniform grids against a 5-point finite-difference solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    #[serde(rename = "M")]
    pub m: usize,
    pub kernel_l2: f64,
    pub kernel_iters: usize,
    pub kernel_converged: bool,
    /// RMS nodal error of the finite-difference solution on the same grid.
    pub fd_l2: f64,
    pub status: String,
}

pub fn run_linear_baseline(cfg: &ExperimentConfig) -> Result<Vec<BaselineRow>> {
    let cfg = ExperimentConfig { tau: Tau::Zero, points: PointMode::Grid, mode: ModeName::Eliminate, ..cfg.clone() };
    cfg.validate()?;
    if cfg.problem != ProblemName::Elliptic {
        return Err(Error::InvalidArgument("the linear baseline is defined for the elliptic problem".into()));
    }
    let truth = truth_grid(&cfg)?;
    let spec = cfg.problem_spec()?;
    let cells: Vec<ExperimentConfig> = cfg.m_list.iter().map(|&m| cfg.with_m(m)).collect();
    let rows = run_cells(cfg.jobs, cells.len(), |i| {
        let c = &cells[i];
        let rec = run_solve_with(c, &truth, Parallelism::Serial);
        let n = (c.m as f64).sqrt().round() as usize - 1;
        let fd = fd_poisson(|x| spec.interior_data(x), |_| 0.0, n).and_then(|g| {
            let mut pred = Vec::new();
            let mut exact = Vec::new();
            for i in 1..n {
                for j in 1..n {
                    pred.push(g.node(i, j));
                    exact.push(elliptic_truth(&[g.coord(i), g.coord(j)]));
                }
            }
            error_from_values(&pred, &exact).map(|e| e.0)
        });
        BaselineRow {
            m: c.m,
            kernel_l2: rec.l2_error,
            kernel_iters: rec.iters,
            kernel_converged: rec.converged,
            fd_l2: fd.unwrap_or(f64::NAN),
            status: rec.status,
        }
    });
    Ok(rows)
}

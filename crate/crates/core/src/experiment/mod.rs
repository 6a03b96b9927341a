//! Batch experiment runner: configuration, single runs, studies and outputs.

pub mod config;
pub mod output;
pub mod runner;
pub mod studies;

pub use config::{ExperimentConfig, InitName, ModeName, PointMode, ProblemName, SigmaRule, SCHEMA_VERSION};
pub use output::{csv_string, write_csv, write_manifest};
pub use runner::{
    collocation, darcy_observations, run_darcy_ip, run_darcy_ip_with, run_solve, run_solve_with, solve_forward,
    truth_grid, DarcyOutcome, ForwardSolve, RunRecord, TruthGrid,
};
pub use studies::{run_convergence_study, run_linear_baseline, run_nugget_study, BaselineRow, ConvergenceStudy, SummaryRow};

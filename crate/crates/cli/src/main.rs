use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gp_pde::experiment::{
    self, write_csv, write_manifest, ExperimentConfig, RunRecord,
};
use gp_pde::validate::{run_validation, ValidateOptions};
use serde::Serialize;
use toml::Value;

/// Kernel collocation solvers for nonlinear PDEs and inverse problems.
#[derive(Parser)]
#[command(name = "gp-pde", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One solve, scored against the reference solution.
    Solve(Overrides),
    /// Repeated solves over `m_list` and seeds; per-M means.
    StudyConvergence(Overrides),
    /// Adaptive vs standard nugget over `eta_list` (elliptic).
    StudyNugget(Overrides),
    /// Linear elliptic problem on grids against a finite-difference solve.
    StudyBaseline(Overrides),
    /// Recover the Darcy coefficient from noisy pointwise data.
    DarcyIp(Overrides),
    /// Run the derivative, Jacobian and oracle checks.
    Validate(ValidateArgs),
    /// Print the resolved configuration as TOML.
    ShowConfig(Overrides),
}

#[derive(Args, Clone, Default)]
struct Overrides {
    /// TOML file with flat keys; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long = "M")]
    m: Option<i64>,
    #[arg(long = "M-omega")]
    m_omega: Option<i64>,
    /// random | grid
    #[arg(long)]
    points: Option<String>,
    #[arg(long)]
    seed: Option<i64>,
    /// Comma-separated lengthscales, or `m-quarter` for sigma = M^(-1/4).
    #[arg(long)]
    sigma: Option<String>,
    /// adaptive | standard
    #[arg(long)]
    nugget: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    /// eliminate | relax | mixed
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    max_iters: Option<i64>,
    #[arg(long)]
    reps: Option<i64>,
    #[arg(long)]
    test_grid: Option<i64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated M values for studies.
    #[arg(long)]
    m_list: Option<String>,
    /// Comma-separated eta values for the nugget study.
    #[arg(long)]
    eta_list: Option<String>,
    /// constrained | normal-equations
    #[arg(long)]
    route: Option<String>,
    /// Concurrent cells in a batch study.
    #[arg(long)]
    jobs: Option<i64>,
    /// Single-threaded solves.
    #[arg(long)]
    serial: bool,
    /// Write 0 for wall-clock seconds (byte-stable output).
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-4)]
    fd_step: f64,
    /// Relative perturbation of the closed-form Laplacian terms.
    #[arg(long, default_value_t = 0.0)]
    mutate: f64,
    /// Skip the grid-refinement checks of the finite-difference oracles.
    #[arg(long)]
    quick: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',').map(|p| p.trim().parse().map_err(|_| format!("cannot parse {p:?} in {s:?}"))).collect()
}

impl Overrides {
    fn table(&self) -> Result<toml::Table, String> {
        let mut t = toml::Table::new();
        let mut put = |k: &str, v: Value| {
            t.insert(k.into(), v);
        };
        let s = |v: &Option<String>| v.clone().map(Value::String);
        let i = |v: Option<i64>| v.map(Value::Integer);
        for (k, v) in [
            ("problem", s(&self.problem)),
            ("points", s(&self.points)),
            ("nugget", s(&self.nugget)),
            ("mode", s(&self.mode)),
            ("route", s(&self.route)),
            ("M", i(self.m)),
            ("M_omega", i(self.m_omega)),
            ("seed", i(self.seed)),
            ("max_iters", i(self.max_iters)),
            ("reps", i(self.reps)),
            ("test_grid", i(self.test_grid)),
            ("jobs", i(self.jobs)),
            ("eta", self.eta.map(Value::Float)),
            ("beta", self.beta.map(Value::Float)),
            ("out", self.out.as_ref().map(|p| Value::String(p.display().to_string()))),
        ] {
            if let Some(v) = v {
                put(k, v);
            }
        }
        if let Some(sig) = &self.sigma {
            if sig == "m-quarter" {
                put("sigma_rule", Value::String("m-quarter".into()));
            } else {
                let v: Vec<f64> = list(sig)?;
                put("sigma", Value::Array(v.into_iter().map(Value::Float).collect()));
                put("sigma_rule", Value::String("fixed".into()));
            }
        }
        if let Some(ms) = &self.m_list {
            let v: Vec<i64> = list(ms)?;
            put("m_list", Value::Array(v.into_iter().map(Value::Integer).collect()));
        }
        if let Some(es) = &self.eta_list {
            let v: Vec<f64> = list(es)?;
            put("eta_list", Value::Array(v.into_iter().map(Value::Float).collect()));
        }
        if self.eta.is_some() {
            // an explicit eta applies at every M
            t.insert("eta_small".into(), Value::Float(self.eta.unwrap_or_default()));
        }
        if self.serial {
            t.insert("parallel".into(), Value::Boolean(false));
        }
        if self.no_timing {
            t.insert("timing".into(), Value::Boolean(false));
        }
        Ok(t)
    }

    fn resolve(&self) -> Result<ExperimentConfig, String> {
        let file = match &self.config {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| format!("{}: {e}", p.display()))?
                .parse::<toml::Table>()
                .map_err(|e| format!("{}: {e}", p.display()))?,
            None => toml::Table::new(),
        };
        let cfg = ExperimentConfig::from_tables(&file, &self.table()?).map_err(|e| e.to_string())?;
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

fn outputs<T: Serialize>(dir: &Path, name: &str, rows: &[T], files: &mut Vec<PathBuf>) -> Result<(), String> {
    let p = dir.join(name);
    write_csv(&p, rows).map_err(|e| e.to_string())?;
    files.push(p);
    Ok(())
}

fn print_records(records: &[RunRecord]) {
    println!("{:<9} {:>5} {:>5} {:>5} {:>9} {:>9} {:>5} {:>10} {:>10} {:>8}  status", "problem", "M", "M_om", "seed", "eta", "mode", "iters", "L2", "Linf", "secs");
    for r in records {
        println!(
            "{:<9} {:>5} {:>5} {:>5} {:>9.1e} {:>9} {:>5} {:>10.3e} {:>10.3e} {:>8.2}  {}",
            r.problem, r.m, r.m_omega, r.seed, r.eta, r.mode, r.iters, r.l2_error, r.linf_error, r.wall_seconds, r.status
        );
    }
}

#[derive(Serialize)]
struct FieldRow {
    x0: f64,
    x1: f64,
    u: f64,
    a: f64,
    a_true: f64,
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let (name, cfg) = match &cli.command {
        Command::Validate(v) => return validate(v),
        Command::ShowConfig(o) => {
            print!("{}", o.resolve()?.to_toml_string().map_err(|e| e.to_string())?);
            return Ok(ExitCode::SUCCESS);
        }
        Command::Solve(o) => ("solve", o.resolve()?),
        Command::StudyConvergence(o) => ("study-convergence", o.resolve()?),
        Command::StudyNugget(o) => ("study-nugget", o.resolve()?),
        Command::StudyBaseline(o) => ("study-baseline", o.resolve()?),
        Command::DarcyIp(o) => {
            let mut o = o.clone();
            o.problem.get_or_insert_with(|| "darcy".into());
            ("darcy-ip", o.resolve()?)
        }
    };
    let dir = cfg.out.clone();
    let mut files = Vec::new();
    let e = |e: gp_pde::Error| e.to_string();
    match name {
        "solve" => {
            let rec = experiment::run_solve(&cfg);
            print_records(std::slice::from_ref(&rec));
            outputs(&dir, "solve.csv", &[rec], &mut files)?;
        }
        "study-convergence" => {
            let st = experiment::run_convergence_study(&cfg).map_err(e)?;
            print_records(&st.records);
            println!();
            for s in &st.summary {
                println!(
                    "M={:<5} runs={} failed={} mean L2={:.3e} [{:.2e}, {:.2e}] mean Linf={:.3e}",
                    s.m, s.runs, s.failed, s.mean_l2, s.min_l2, s.max_l2, s.mean_linf
                );
            }
            outputs(&dir, "runs.csv", &st.records, &mut files)?;
            outputs(&dir, "summary.csv", &st.summary, &mut files)?;
        }
        "study-nugget" => {
            let recs = experiment::run_nugget_study(&cfg).map_err(e)?;
            print_records(&recs);
            outputs(&dir, "nugget.csv", &recs, &mut files)?;
        }
        "study-baseline" => {
            let rows = experiment::run_linear_baseline(&cfg).map_err(e)?;
            for r in &rows {
                println!("M={:<5} kernel L2={:.3e} ({} iters) fd L2={:.3e} {}", r.m, r.kernel_l2, r.kernel_iters, r.fd_l2, r.status);
            }
            outputs(&dir, "baseline.csv", &rows, &mut files)?;
        }
        "darcy-ip" => {
            let out = experiment::run_darcy_ip(&cfg).map_err(e)?;
            print_records(std::slice::from_ref(&out.record));
            println!(
                "misfit {:.3e}  rel L2(a) {:.3e}  zero-field baseline {:.3e}",
                out.misfit, out.a_rel_error, out.zero_rel_error
            );
            let fields: Vec<FieldRow> = out
                .grid
                .points
                .chunks(2)
                .enumerate()
                .map(|(i, x)| FieldRow { x0: x[0], x1: x[1], u: out.u_recovered[i], a: out.a_recovered[i], a_true: out.grid.values[i] })
                .collect();
            outputs(&dir, "darcy.csv", &[out.record.clone()], &mut files)?;
            outputs(&dir, "darcy_fields.csv", &fields, &mut files)?;
            let diag = serde_json::json!({
                "misfit": out.misfit,
                "a_rel_error": out.a_rel_error,
                "zero_rel_error": out.zero_rel_error,
                "iters": out.record.iters,
                "converged": out.record.converged,
            });
            let p = dir.join("darcy_diagnostics.json");
            std::fs::write(&p, serde_json::to_string_pretty(&diag).map_err(|e| e.to_string())? + "\n").map_err(|e| e.to_string())?;
            files.push(p);
        }
        _ => unreachable!(),
    }
    let m = write_manifest(&dir, name, &cfg, &files).map_err(e)?;
    eprintln!("wrote {} files to {}", files.len() + 1, m.parent().unwrap_or(&dir).display());
    Ok(ExitCode::SUCCESS)
}

fn validate(v: &ValidateArgs) -> Result<ExitCode, String> {
    let opts = ValidateOptions {
        seed: v.seed,
        fd_step: v.fd_step,
        mutate_laplacian: v.mutate,
        oracles: !v.quick,
        ..ValidateOptions::default()
    };
    let rep = run_validation(&opts);
    println!("{rep}");
    if let Some(dir) = &v.out {
        std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
        let text = serde_json::to_string_pretty(&rep).map_err(|e| e.to_string())?;
        std::fs::write(dir.join("validate.json"), text + "\n").map_err(|e| e.to_string())?;
    }
    Ok(if rep.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

use gp_pde::experiment::*;
use gp_pde::reference::ColeHopf;
use gp_pde::{sample_collocation, BoxDomain, DerivativeOp, FunctionalVector, GramSystem, KernelSpec, NuggetKind, Parallelism};

fn small_elliptic() -> ExperimentConfig {
    ExperimentConfig {
        m: 300,
        m_omega: Some(270),
        parallel: false,
        timing: false,
        ..ExperimentConfig::for_problem(ProblemName::Elliptic)
    }
}

#[test]
fn invalid_interior_count_is_a_config_error_record() {
    let cfg = ExperimentConfig { m_omega: Some(300), ..small_elliptic() };
    let rec = run_solve(&cfg);
    assert_eq!(rec.status, "config-error");
    assert!(rec.l2_error.is_nan());
    assert_eq!(rec.config_hash, cfg.hash());
}

#[test]
fn serial_output_is_byte_identical() {
    let cfg = small_elliptic();
    let a = csv_string(&[run_solve(&cfg)]).unwrap();
    let b = csv_string(&[run_solve(&cfg)]).unwrap();
    assert_eq!(a, b);
    let header = a.lines().next().unwrap();
    assert!(header.starts_with("problem,M,M_omega,seed,sigma,eta,beta,mode"));
    assert!(header.ends_with("wall_seconds,status,config_hash"));

    let study = ExperimentConfig { m_list: vec![100, 200], reps: 2, ..cfg };
    let s1 = run_convergence_study(&study).unwrap();
    let s2 = run_convergence_study(&ExperimentConfig { jobs: 2, ..study }).unwrap();
    assert_eq!(csv_string(&s1.records).unwrap(), csv_string(&s2.records).unwrap());
    assert_eq!(s1.summary.len(), 2);
    assert_eq!(s1.summary[0].runs, 2);
}

#[test]
fn elliptic_solve_converges_and_routes_agree() {
    let cfg = ExperimentConfig { m: 600, m_omega: Some(540), ..small_elliptic() };
    let a = run_solve(&cfg);
    assert_eq!(a.status, "ok");
    assert!(a.converged && a.iters <= 10, "{a:?}");
    assert!(a.l2_error < 1e-3, "{}", a.l2_error);
    assert!(a.final_loss < a.initial_loss);
    let b = run_solve(&ExperimentConfig { route: gp_pde::solver::InnerRoute::NormalEquations, ..cfg.clone() });
    assert!((a.l2_error - b.l2_error).abs() <= 1e-2 * a.l2_error, "{} vs {}", a.l2_error, b.l2_error);
    let mixed = run_solve(&ExperimentConfig { mode: ModeName::Mixed, ..cfg.clone() });
    assert_eq!(mixed.beta, Some(1e-5));
    assert!(mixed.l2_error < 10.0 * a.l2_error);
    let relax = run_solve(&ExperimentConfig { mode: ModeName::Relax, ..cfg });
    assert_eq!(relax.status, "ok");
    assert!(relax.l2_error < 1e-2);
}

#[test]
fn grid_points_with_quarter_rule() {
    let cfg = ExperimentConfig {
        m: 1024,
        points: PointMode::Grid,
        sigma_rule: SigmaRule::MQuarter,
        eta: 1e-13,
        ..small_elliptic()
    };
    let rec = run_solve(&cfg);
    assert_eq!(rec.status, "ok");
    assert_eq!(rec.m_omega, 900);
    assert!(rec.converged && rec.iters <= 5, "{rec:?}");
}

#[test]
fn darcy_noise_free_dense_data_is_fitted() {
    let cfg = ExperimentConfig {
        m: 140,
        m_omega: Some(100),
        n_obs: 100,
        obs_noise: Some(0.0),
        parallel: false,
        ..ExperimentConfig::for_problem(ProblemName::Darcy)
    };
    let out = run_darcy_ip(&cfg).unwrap();
    assert!(out.record.converged);
    // consistent data: residual below the noise level the penalty assumes
    assert!(out.misfit < cfg.gamma * (cfg.n_obs as f64).sqrt(), "misfit {}", out.misfit);
    assert_eq!(out.u_recovered.len(), cfg.test_grid * cfg.test_grid);
}

#[test]
fn nugget_kinds_coincide_for_a_single_block() {
    let pts = sample_collocation(&BoxDomain::unit_square(), 40, 30, 2).unwrap();
    let fv = FunctionalVector::build(&[DerivativeOp::Identity], 1, &pts).unwrap();
    let k = KernelSpec::isotropic(0.2, 2).unwrap();
    let a = GramSystem::new(&k, &fv, NuggetKind::Adaptive, 1e-8, Parallelism::Serial).unwrap();
    let s = GramSystem::new(&k, &fv, NuggetKind::Standard, 1e-8, Parallelism::Serial).unwrap();
    assert_eq!(a.regularization(), s.regularization());
    assert_eq!(a.factor().l(), s.factor().l());
}

#[test]
fn cole_hopf_boundary_values() {
    let ch = ColeHopf::new(0.02, ColeHopf::DEFAULT_ORDER).unwrap();
    for t in [0.1, 0.5, 1.0] {
        assert!(ch.eval(-1.0, t).unwrap().abs() < 1e-10);
        assert!(ch.eval(1.0, t).unwrap().abs() < 1e-10);
        assert!(ch.eval(0.0, t).unwrap().abs() < 1e-12);
    }
    for s in [-0.7, 0.2, 0.9] {
        assert_eq!(ch.eval(s, 0.0).unwrap(), -(std::f64::consts::PI * s).sin());
    }
}

#[test]
fn manifest_lists_outputs() {
    let dir = std::env::temp_dir().join(format!("gp-pde-manifest-{}", std::process::id()));
    let cfg = ExperimentConfig { out: dir.clone(), ..small_elliptic() };
    let rec = run_solve(&ExperimentConfig { m: 60, m_omega: Some(50), ..cfg.clone() });
    let table = dir.join("solve.csv");
    write_csv(&table, &[rec]).unwrap();
    let m = write_manifest(&dir, "solve", &cfg, &[table]).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(m).unwrap()).unwrap();
    assert_eq!(v["command"], "solve");
    assert_eq!(v["config_hash"], cfg.hash());
    assert_eq!(v["outputs"][0], "solve.csv");
    std::fs::remove_dir_all(dir).unwrap();
}

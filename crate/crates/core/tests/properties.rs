use gp_pde::gram::assemble_theta;
use gp_pde::problems::{burgers_spec, darcy_ip_spec, eikonal_spec, elliptic_spec, ProblemSpec, RowKind, Tau};
use gp_pde::reference::error_from_values;
use gp_pde::validate::kernel_fd::ops_for;
use gp_pde::{sample_collocation, DerivativeOp, KernelSpec, Parallelism};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn op() -> impl Strategy<Value = DerivativeOp> {
    proptest::sample::select(ops_for(2))
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, 2)
}

fn kernel() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        (0.05f64..1.0).prop_map(|s| KernelSpec::isotropic(s, 2).unwrap()),
        (0.05f64..1.0, 0.05f64..1.0).prop_map(|(a, b)| KernelSpec::anisotropic(&[a, b]).unwrap()),
    ]
}

fn spec(i: usize) -> ProblemSpec {
    match i {
        0 => elliptic_spec(Tau::Cubic),
        1 => burgers_spec(0.02, false).unwrap(),
        2 => eikonal_spec(0.1).unwrap(),
        _ => darcy_ip_spec(1e-3, 4).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bilinear_form_is_symmetric(k in kernel(), a in op(), b in op(), x in point(), y in point()) {
        let lr = k.eval_bilinear(a, &x, b, &y).unwrap();
        let rl = k.eval_bilinear(b, &y, a, &x).unwrap();
        prop_assert!((lr - rl).abs() <= 1e-12 * lr.abs().max(1.0), "{lr} vs {rl}");
    }

    #[test]
    fn identity_pair_is_the_kernel(k in kernel(), x in point(), y in point()) {
        let v = k.eval_bilinear(DerivativeOp::Identity, &x, DerivativeOp::Identity, &y).unwrap();
        prop_assert_eq!(v, k.eval_kernel(&x, &y).unwrap());
        prop_assert!(v > 0.0 && v <= 1.0);
    }

    #[test]
    fn laplacian_is_sum_of_second_partials(k in kernel(), b in op(), x in point(), y in point()) {
        let lap = k.eval_bilinear(DerivativeOp::Laplacian, &x, b, &y).unwrap();
        let sum = k.eval_bilinear(DerivativeOp::SecondPartial(0), &x, b, &y).unwrap()
            + k.eval_bilinear(DerivativeOp::SecondPartial(1), &x, b, &y).unwrap();
        prop_assert!((lap - sum).abs() <= 1e-12 * lap.abs().max(1.0));
    }

    #[test]
    fn elimination_satisfies_constraints(p in 0usize..4, seed in 0u64..1000) {
        let s = spec(p);
        let pts = sample_collocation(&s.domain, 24, 18, seed).unwrap();
        let obs = vec![0.01; 4];
        let disc = s.discretize(&pts, Some(&obs)).unwrap();
        let sys = &disc.system;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = (0..sys.free().len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let z = sys.complete(&w).unwrap();
        prop_assert_eq!(sys.restrict(&z), w);
        for (r, v) in sys.rows().iter().zip(sys.residual(&z).unwrap()) {
            if r.kind != RowKind::Observation {
                prop_assert!((v - r.target).abs() <= 1e-12 * r.target.abs().max(1.0));
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_on_the_domain(p in 0usize..3, seed in 0u64..1000, m in 10usize..80) {
        let s = spec(p);
        let mi = m * 3 / 4;
        let a = sample_collocation(&s.domain, m, mi, seed).unwrap();
        let b = sample_collocation(&s.domain, m, mi, seed).unwrap();
        prop_assert_eq!(a.coords(), b.coords());
        for i in 0..m {
            let x = a.point(i);
            let inside = (0..2).all(|k| x[k] > s.domain.lo()[k] && x[k] < s.domain.hi()[k]);
            prop_assert_eq!(inside, i < mi);
            prop_assert_eq!(s.domain.on_constraint_face(x), i >= mi);
        }
    }

    #[test]
    fn assembly_is_symmetric_and_thread_independent(seed in 0u64..100) {
        let s = spec((seed % 3) as usize);
        let pts = sample_collocation(&s.domain, 30, 22, seed).unwrap();
        let disc = s.discretize(&pts, None).unwrap();
        let k = KernelSpec::isotropic(0.3, 2).unwrap();
        let (a, _) = assemble_theta(&k, &disc.fields[0], Parallelism::Serial).unwrap();
        let (b, _) = assemble_theta(&k, &disc.fields[0], Parallelism::Rayon).unwrap();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                prop_assert_eq!(a[(i, j)].to_bits(), b[(i, j)].to_bits());
                prop_assert_eq!(a[(i, j)].to_bits(), a[(j, i)].to_bits());
            }
        }
    }

    #[test]
    fn error_metrics_of_a_shift(v in proptest::collection::vec(-5.0f64..5.0, 1..50), d in -1.0f64..1.0) {
        let shifted: Vec<f64> = v.iter().map(|x| x + d).collect();
        let (l2, linf) = error_from_values(&shifted, &v).unwrap();
        prop_assert!((l2 - d.abs()).abs() < 1e-12 && (linf - d.abs()).abs() < 1e-12);
    }
}

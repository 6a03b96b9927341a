use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gp_pde::gram::{assemble_theta, factorize, standard_nugget};
use gp_pde::problems::{burgers_spec, elliptic_spec, Tau};
use gp_pde::solver::{gauss_newton_eliminated, GnConfig};
use gp_pde::{sample_collocation, GramSystem, KernelSpec, NuggetKind, Parallelism};

const MODES: [(&str, Parallelism); 2] = [("serial", Parallelism::Serial), ("rayon", Parallelism::Rayon)];

fn gram_assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble_theta");
    g.sample_size(10);
    let ell = elliptic_spec(Tau::Cubic);
    let bur = burgers_spec(0.02, false).unwrap();
    let cases = [
        ("elliptic", &ell, KernelSpec::isotropic(0.2, 2).unwrap(), 600, 540),
        ("burgers", &bur, KernelSpec::anisotropic(&[0.05, 1.0 / 3.0]).unwrap(), 600, 500),
    ];
    for (name, spec, kernel, m, mi) in cases {
        let pts = sample_collocation(&spec.domain, m, mi, 0).unwrap();
        let disc = spec.discretize(&pts, None).unwrap();
        for (mode, par) in MODES {
            g.bench_with_input(BenchmarkId::new(name, mode), &par, |b, &par| {
                b.iter(|| assemble_theta(&kernel, &disc.fields[0], par).unwrap())
            });
        }
    }
    g.finish();
}

fn cholesky(c: &mut Criterion) {
    let mut g = c.benchmark_group("cholesky");
    g.sample_size(10);
    let spec = elliptic_spec(Tau::Cubic);
    let pts = sample_collocation(&spec.domain, 1024, 900, 0).unwrap();
    let disc = spec.discretize(&pts, None).unwrap();
    let kernel = KernelSpec::isotropic(0.2, 2).unwrap();
    let (theta, _) = assemble_theta(&kernel, &disc.fields[0], Parallelism::Serial).unwrap();
    let a = standard_nugget(&theta, 1e-6);
    for (mode, par) in MODES {
        g.bench_with_input(BenchmarkId::new("N=1924", mode), &par, |b, &par| b.iter(|| factorize(&a, par).unwrap()));
    }
    g.finish();
}

fn gauss_newton(c: &mut Criterion) {
    let mut g = c.benchmark_group("gauss_newton");
    g.sample_size(10);
    let spec = elliptic_spec(Tau::Cubic);
    let pts = sample_collocation(&spec.domain, 600, 540, 0).unwrap();
    let disc = spec.discretize(&pts, None).unwrap();
    let kernel = KernelSpec::isotropic(0.2, 2).unwrap();
    for (mode, par) in MODES {
        let gram = GramSystem::new(&kernel, &disc.fields[0], NuggetKind::Adaptive, 1e-12, par).unwrap();
        let cfg = GnConfig { par, ..GnConfig::default() };
        g.bench_with_input(BenchmarkId::new("elliptic M=600", mode), &par, |b, _| {
            b.iter(|| gauss_newton_eliminated(&gram, &disc, &cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, gram_assembly, cholesky, gauss_newton);
criterion_main!(benches);

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use torus_energy::energy::{energy_discrete, energy_grid};
use torus_energy::minimize::{lattice_points, minimize_points, Init, MinimizeConfig, Optimizer};
use torus_energy::subharmonic::{scan_entire_subharmonicity, ScanConfig, ScanQuadrature};
use torus_energy::{DiagonalPolicy, DiscreteMeasure, GridMeasure, KernelSpec, Point, Space};

fn discrete(c: &mut Criterion) {
    let k = KernelSpec::riesz(1.0);
    let mut g = c.benchmark_group("energy_discrete");
    for m in [8usize, 16, 32] {
        let pts = lattice_points(m, 2).iter().map(|p| Point::torus(p).unwrap()).collect();
        let mu = DiscreteMeasure::uniform(Space::Torus(2), pts).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(m * m), &mu, |b, mu| {
            b.iter(|| energy_discrete(&k, black_box(mu), false).unwrap())
        });
    }
    g.finish();
}

fn grid(c: &mut Criterion) {
    let k = KernelSpec::riesz(1.0);
    let mut g = c.benchmark_group("energy_grid");
    for n in [16usize, 32, 64] {
        let mu = GridMeasure::uniform(2, n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &mu, |b, mu| {
            b.iter(|| energy_grid(&k, black_box(mu), DiagonalPolicy::default()).unwrap())
        });
    }
    g.finish();
}

fn scan(c: &mut Criterion) {
    let k = KernelSpec::riesz(1.0);
    let cfg = ScanConfig { n_pairs: 20, radii_per_pair: 2, quadrature: ScanQuadrature::Mc { n: 2000 }, ..ScanConfig::default() };
    c.bench_function("scan_subharmonic_t2", |b| {
        b.iter(|| scan_entire_subharmonicity(&k, Space::Torus(2), black_box(&cfg)).unwrap())
    });
}

fn minimize(c: &mut Criterion) {
    let cfg = MinimizeConfig::new(
        KernelSpec::riesz(1.0),
        Space::Torus(2),
        32,
        Optimizer::Gradient { max_iters: 200, tol: 1e-8, max_step: 0.1 },
        Init::Random { seed: 1 },
    );
    let mut g = c.benchmark_group("minimize");
    g.sample_size(10);
    g.bench_function("gradient_t2_n32", |b| b.iter(|| minimize_points(black_box(&cfg)).unwrap()));
    g.finish();
}

criterion_group!(benches, discrete, grid, scan, minimize);
criterion_main!(benches);

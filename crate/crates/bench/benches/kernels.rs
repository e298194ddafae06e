use criterion::{black_box, criterion_group, criterion_main, Criterion};
use repulsion_bench::{models, random_field};
use repulsion_core::capacity::{solve_obstacle, ObstacleProblem};
use repulsion_core::conditional::{conditional_law, gibbs_sweep, BoxGeometry};
use repulsion_core::lattice::{hamiltonian_energy, j_apply, QPolynomial, TorusGrid};
use repulsion_core::rng::stream;
use repulsion_core::spectral::{green_infinite, QuadratureSpec, SpectralSampler};

fn bench_j_apply(c: &mut Criterion) {
    let grid = TorusGrid::new(3, 32, 0.1);
    let field = random_field(grid, 1);
    let mut group = c.benchmark_group("j_apply_32cubed");
    for (name, q) in models() {
        group.bench_function(name, |b| {
            b.iter(|| j_apply(&q, grid.eps, black_box(&field)))
        });
    }
    group.finish();
}

fn bench_hamiltonian(c: &mut Criterion) {
    let grid = TorusGrid::new(3, 16, 0.0);
    let field = random_field(grid, 2);
    let q = QPolynomial::mixed();
    c.bench_function("hamiltonian_16cubed_mixed", |b| {
        b.iter(|| hamiltonian_energy(&q, black_box(&field)))
    });
}

fn bench_spectral_sample(c: &mut Criterion) {
    let grid = TorusGrid::new(3, 16, 0.1);
    let sampler = SpectralSampler::new(&QPolynomial::free_field(), grid).unwrap();
    let mut rng = stream(3, "bench-sample", 0);
    c.bench_function("spectral_sample_16cubed", |b| {
        b.iter(|| sampler.sample_with(&mut rng))
    });
}

fn bench_gibbs_sweep(c: &mut Criterion) {
    let grid = TorusGrid::new(3, 16, 0.1);
    let field = random_field(grid, 4);
    let q = QPolynomial::free_field();
    c.bench_function("gibbs_sweep_16cubed", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            gibbs_sweep(&q, black_box(&field), seed)
        })
    });
}

fn bench_conditional_solve(c: &mut Criterion) {
    let grid = TorusGrid::new(3, 16, 0.0);
    let q = QPolynomial::membrane();
    let geometry = BoxGeometry::new(vec![0, 0, 0], 10, 2).unwrap();
    let boundary: Vec<f64> = (0..geometry.boundary.len())
        .map(|i| ((i * 37) % 17) as f64 / 17.0 - 0.5)
        .collect();
    c.bench_function("conditional_law_box10_membrane", |b| {
        b.iter(|| conditional_law(&q, grid, &geometry, black_box(&boundary)).unwrap())
    });
}

fn bench_obstacle(c: &mut Criterion) {
    let problem = ObstacleProblem::new(1, 3, 0.5, 4.0).unwrap();
    c.bench_function("obstacle_solve_h0.5_r4", |b| {
        b.iter(|| solve_obstacle(black_box(&problem)))
    });
}

fn bench_quadrature(c: &mut Criterion) {
    let q = QPolynomial::free_field();
    let spec = QuadratureSpec::new(16, 2);
    c.bench_function("green_infinite_d3_origin", |b| {
        b.iter(|| green_infinite(&q, 3, black_box(&[0, 0, 0]), &spec))
    });
}

criterion_group!(
    benches,
    bench_j_apply,
    bench_hamiltonian,
    bench_spectral_sample,
    bench_gibbs_sweep,
    bench_conditional_solve,
    bench_obstacle,
    bench_quadrature
);
criterion_main!(benches);

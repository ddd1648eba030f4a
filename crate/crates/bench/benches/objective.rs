use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nearstab_core::manifold::{random_point, random_tangent};
use nearstab_core::objective::HessianMode;
use nearstab_core::{evaluate, gen_gaussian, gen_grcar, project, solve, Field, ScalarPencil, SolveOptions, StabilityRegion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn objective(c: &mut Criterion) {
    let mut group = c.benchmark_group("objective");
    for n in [5usize, 10, 20] {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let p = gen_gaussian(n, Field::Complex, &mut rng).unwrap();
        let g = random_point(n, Field::Complex, &mut rng);
        let d = random_tangent(&g, &mut rng);
        let region = StabilityRegion::Hurwitz;
        group.bench_with_input(BenchmarkId::new("evaluate", n), &n, |b, _| b.iter(|| evaluate(region, &p, &g).unwrap()));
        let e = evaluate(region, &p, &g).unwrap();
        group.bench_with_input(BenchmarkId::new("gradient", n), &n, |b, _| b.iter(|| e.gradient()));
        group.bench_with_input(BenchmarkId::new("hessian_vec", n), &n, |b, _| {
            b.iter(|| e.hessian_vec(region, &p, &d.xq, &d.xz, HessianMode::Lenient).unwrap())
        });
    }
    group.finish();
}

fn projection(c: &mut Criterion) {
    let s = ScalarPencil::real(2.0, -1.0);
    c.bench_function("project/hurwitz", |b| b.iter(|| project(StabilityRegion::Hurwitz, std::hint::black_box(s))));
    c.bench_function("project/schur", |b| b.iter(|| project(StabilityRegion::Schur, std::hint::black_box(s))));
}

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    let p = gen_grcar(8).unwrap();
    let opts = SolveOptions::for_pencil(&p);
    group.bench_function("grcar8_hurwitz_identity", |b| b.iter(|| solve(StabilityRegion::Hurwitz, &p, &opts).unwrap()));
    group.finish();
}

criterion_group!(benches, objective, projection, solver);
criterion_main!(benches);

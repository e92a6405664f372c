use confam::transforms::{beurling, cauchy_green, TransformPlan};
use confam_bench::{bump, lattice};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("transforms");
    for n in [65, 129, 257] {
        let lat = lattice(n);
        let plan = TransformPlan::new(lat, 2).unwrap();
        let phi = bump(lat);
        group.bench_with_input(BenchmarkId::new("cauchy", n), &phi, |b, phi| b.iter(|| cauchy_green(phi, &plan).unwrap()));
        group.bench_with_input(BenchmarkId::new("beurling", n), &phi, |b, phi| b.iter(|| beurling(phi, &plan).unwrap()));
    }
    group.bench_function("plan/257", |b| b.iter(|| TransformPlan::new(lattice(257), 2).unwrap()));
    group.finish();
}

criterion_group!(benches, transforms);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use curvbill_bench::{disk, ellipse, triangle};
use curvbill_core::billiard::{step, PhasePoint};
use curvbill_core::string::ConvexCaustic;
use curvbill_core::verify::verify_caustic;
use curvbill_core::Geometry;
use std::hint::black_box;

fn map_step(c: &mut Criterion) {
    let d = disk();
    let e = ellipse(2048);
    let p = PhasePoint::new(0.3, 0.9);
    c.bench_function("step/disk", |b| b.iter(|| step(&d, black_box(p)).unwrap()));
    c.bench_function("step/ellipse", |b| b.iter(|| step(&e, black_box(p)).unwrap()));
}

fn construction(c: &mut Criterion) {
    let mut g = c.benchmark_group("string_table");
    g.sample_size(10);
    g.bench_function("ellipse/1024", |b| b.iter(|| ellipse(black_box(1024))));
    g.bench_function("triangle/1024", |b| b.iter(|| triangle(black_box(1024))));
    g.finish();
}

fn summary(c: &mut Criterion) {
    let mut g = c.benchmark_group("summary");
    g.sample_size(10);
    g.bench_function("ellipse", |b| {
        b.iter_batched(|| ellipse(1024), |t| t.summary().diameter, BatchSize::LargeInput)
    });
    let t = ellipse(1024);
    let caustic = ConvexCaustic::segment(Geometry::Hyperbolic, 0.4).unwrap();
    g.bench_function("verify/ellipse", |b| {
        b.iter(|| verify_caustic(&t, &caustic, 16, 1e-6).unwrap().verified)
    });
    g.finish();
}

criterion_group!(benches, map_step, construction, summary);
criterion_main!(benches);

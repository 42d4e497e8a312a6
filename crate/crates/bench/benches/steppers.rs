use apost_bench::setup;
use apost_core::steppers::{
    run_backward_euler, run_bdf2, run_crank_nicolson, run_dg1, run_extrapolated_euler,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn steppers(c: &mut Criterion) {
    let mut group = c.benchmark_group("steppers");
    for m in [256, 1024] {
        let (p, d, mesh) = setup(m);
        group.bench_with_input(BenchmarkId::new("backward_euler", m), &m, |b, _| {
            b.iter(|| run_backward_euler(&p, black_box(&mesh), &d).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("crank_nicolson", m), &m, |b, _| {
            b.iter(|| run_crank_nicolson(&p, black_box(&mesh), &d).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("extrapolated", m), &m, |b, _| {
            b.iter(|| run_extrapolated_euler(&p, black_box(&mesh), &d).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("dg1", m), &m, |b, _| {
            b.iter(|| run_dg1(&p, black_box(&mesh), &d).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("bdf2", m), &m, |b, _| {
            b.iter(|| run_bdf2(&p, black_box(&mesh), &d).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, steppers);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use wstate_ecp::analytics::{f_grid, sweep_curve, total_success};
use wstate_ecp::ecp::{iterate, run_round_exact};
use wstate_ecp::mc::estimate;
use wstate_ecp::{PcdModel, WClassParams};

fn round_exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_round_exact");
    let pcd = PcdModel::default();
    for n in [3, 4, 6, 8, 10] {
        let p = WClassParams::from_alpha2(0.2, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| run_round_exact(black_box(p), &pcd).unwrap())
        });
    }
    group.finish();
}

fn iterate_rounds(c: &mut Criterion) {
    let pcd = PcdModel::default();
    let p = WClassParams::from_alpha2(0.2, 3).unwrap();
    c.bench_function("iterate/N=3/n=6", |b| b.iter(|| iterate(black_box(&p), 6, &pcd).unwrap()));
}

fn closed_forms(c: &mut Criterion) {
    let p = WClassParams::from_alpha2(0.2, 3).unwrap();
    c.bench_function("total_success/n=20", |b| b.iter(|| total_success(black_box(&p), 20).unwrap()));
    let grid = f_grid(0.05, 1.0, 0.05).unwrap();
    c.bench_function("sweep/20x5", |b| b.iter(|| sweep_curve(black_box(&grid), 5, 3).unwrap()));
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate");
    group.sample_size(10);
    let p = WClassParams::from_alpha2(0.2, 3).unwrap();
    for shots in [10_000u64, 100_000] {
        group.bench_with_input(BenchmarkId::from_parameter(shots), &shots, |b, &shots| {
            b.iter(|| estimate(black_box(&p), 5, shots, 42).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, round_exact, iterate_rounds, closed_forms, monte_carlo);
criterion_main!(benches);

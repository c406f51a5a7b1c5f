use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use modeshift::mean_shift::{default_cap, gaussian_ms_iterates};
use modeshift::{
    ms_deflation, ms_full_with, ms_iterates_redux, DeflationConfig, FullOptions, ReduxOptions,
};
use modeshift_bench::mixture;

fn iterates(c: &mut Criterion) {
    let mut group = c.benchmark_group("iterates");
    for d in [10, 100] {
        let data = mixture(d, 10, 20, 1).data;
        let w = (2.0 * d as f64).sqrt();
        let opts = ReduxOptions {
            trace: false,
            ..ReduxOptions::new(default_cap(data.len()))
        };
        group.bench_with_input(BenchmarkId::new("epanechnikov", d), &d, |b, _| {
            b.iter(|| ms_iterates_redux(&data, black_box(0), w, &opts).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("gaussian", d), &d, |b, _| {
            b.iter(|| gaussian_ms_iterates(&data, black_box(0), w, 1e-8 * w, 1000).unwrap())
        });
    }
    group.finish();
}

fn clustering(c: &mut Criterion) {
    let mut group = c.benchmark_group("mean_shift_clustering");
    group.sample_size(10);
    let data = mixture(50, 10, 20, 2).data;
    let w = 10.0;
    for memoize in [true, false] {
        let opts = FullOptions {
            memoize,
            ..Default::default()
        };
        group.bench_function(BenchmarkId::new("full", memoize), |b| {
            b.iter(|| ms_full_with(&data, w, &opts).unwrap())
        });
    }
    let cfg = DeflationConfig::new(1.0);
    let cap = default_cap(data.len());
    group.bench_function("deflation", |b| {
        b.iter(|| ms_deflation(&data, &cfg, cap).unwrap())
    });
    group.finish();
}

criterion_group!(benches, iterates, clustering);
criterion_main!(benches);

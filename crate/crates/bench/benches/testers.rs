use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use localtest_bench::{reverse_sorted, sorted};
use localtest_core::rng::stream;
use localtest_core::testers::run_test;
use localtest_core::{Algo, LocalProperty, TestConfig};

fn one_dimensional(c: &mut Criterion) {
    let p = LocalProperty::monotone(1);
    let mut g = c.benchmark_group("monotone_1d");
    for n in [1 << 10, 1 << 14, 1 << 18] {
        let a = reverse_sorted(n);
        for algo in [Algo::Simple, Algo::Canonical, Algo::Pot] {
            let cfg = TestConfig::new(algo, 0.25).unwrap();
            g.bench_with_input(BenchmarkId::new(algo.as_str(), n), &a, |b, a| {
                let mut rng = stream(0, "bench");
                b.iter(|| black_box(run_test(&p, a, &cfg, &mut rng).unwrap().accept));
            });
        }
    }
    g.finish();
}

fn two_dimensional(c: &mut Criterion) {
    let p = LocalProperty::monotone(2);
    let cfg = TestConfig::new(Algo::Canonical, 0.25).unwrap();
    let mut g = c.benchmark_group("monotone_2d_canonical");
    g.sample_size(20);
    for n in [64, 128, 256] {
        let a = sorted(n, 2);
        g.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            let mut rng = stream(0, "bench");
            b.iter(|| black_box(run_test(&p, a, &cfg, &mut rng).unwrap().accept));
        });
    }
    g.finish();
}

criterion_group!(benches, one_dimensional, two_dimensional);
criterion_main!(benches);

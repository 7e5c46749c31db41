use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use assortment_bench::random_parameters;
use assortment_core::optimizer::{
    brute_force_opt, constrained_assortment_opt, static_assortment_opt,
};

fn bench_static(c: &mut Criterion) {
    let mut group = c.benchmark_group("static_assortment_opt");
    for &n in &[20usize, 100, 300] {
        let (revenues, utilities) = random_parameters(n, 11);
        let ground: Vec<usize> = (1..=n).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                static_assortment_opt(
                    black_box(&revenues),
                    black_box(&utilities),
                    &ground,
                    10,
                    1e-9,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_constrained(c: &mut Criterion) {
    let mut group = c.benchmark_group("constrained_assortment_opt");
    for &n in &[20usize, 100, 300] {
        let (revenues, utilities) = random_parameters(n, 12);
        let ground: Vec<usize> = (1..=n).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                constrained_assortment_opt(
                    black_box(&revenues),
                    black_box(&utilities),
                    &ground,
                    10,
                    n / 2 + 1,
                    1e-9,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_brute_force(c: &mut Criterion) {
    let (revenues, utilities) = random_parameters(16, 13);
    let ground: Vec<usize> = (1..=16).collect();
    c.bench_function("brute_force_opt/16", |b| {
        b.iter(|| {
            brute_force_opt(black_box(&revenues), black_box(&utilities), &ground, 4, None)
                .unwrap()
        })
    });
}

criterion_group!(benches, bench_static, bench_constrained, bench_brute_force);
criterion_main!(benches);

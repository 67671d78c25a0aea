use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use magjump::forms::hodge;
use magjump::magnetic::generator_quotient_with;
use magjump::MagneticOperator;
use magjump_bench::random_instance;

fn assemble(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble_and_diagonalize");
    for n in [8, 32, 128] {
        let fx = random_instance(n, 0.2, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &fx, |b, fx| {
            b.iter(|| MagneticOperator::assemble(&fx.graph, &fx.a, &fx.v).unwrap())
        });
    }
    group.finish();
}

fn semigroup(c: &mut Criterion) {
    let mut group = c.benchmark_group("semigroup_exact");
    for n in [8, 32, 128] {
        let fx = random_instance(n, 0.2, 2);
        let op = MagneticOperator::assemble(&fx.graph, &fx.a, &fx.v).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &fx, |b, fx| {
            b.iter(|| op.semigroup_exact(black_box(0.5), &fx.f).unwrap())
        });
    }
    group.finish();
}

fn hodge_split(c: &mut Criterion) {
    let mut group = c.benchmark_group("hodge");
    for n in [32, 256, 1500] {
        let fx = random_instance(n, 4.0 / n as f64, 3);
        group.sample_size(20);
        group.bench_with_input(BenchmarkId::from_parameter(n), &fx, |b, fx| {
            b.iter(|| hodge(&fx.graph, &fx.a).unwrap())
        });
    }
    group.finish();
}

fn quotient(c: &mut Criterion) {
    let fx = random_instance(16, 0.3, 4);
    let free = MagneticOperator::free(&fx.graph).unwrap();
    c.bench_function("generator_quotient_16", |b| {
        b.iter(|| generator_quotient_with(&free, &fx.a, &fx.v, &fx.f, black_box(1e-3)).unwrap())
    });
}

criterion_group!(benches, assemble, semigroup, hodge_split, quotient);
criterion_main!(benches);

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use magjump::path::{LineIntegrator, Simulator};
use magjump::{estimate_vector, random};
use magjump_bench::{lattice, random_instance};

fn simulate(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate_path");
    for points in [16, 64] {
        let fx = lattice(points, 1.0);
        let sim = Simulator::new(&fx.graph);
        group.bench_with_input(BenchmarkId::new("lattice", points), &sim, |b, sim| {
            let mut stream = 0;
            b.iter(|| {
                stream += 1;
                sim.simulate(0, black_box(1.0), 7, stream).unwrap()
            })
        });
    }
    group.finish();
}

fn line_integral(c: &mut Criterion) {
    let fx = lattice(64, 1.0);
    let sim = Simulator::new(&fx.graph);
    let integ = LineIntegrator::new(&fx.graph, &fx.a).unwrap();
    let path = sim.simulate(0, 10.0, 1, 0).unwrap();
    c.bench_function("stratonovich_lattice64", |b| b.iter(|| integ.stratonovich(black_box(&path))));
}

fn fki(c: &mut Criterion) {
    let mut group = c.benchmark_group("fki_estimate_vector");
    group.sample_size(10);
    let paths = 10_000;
    group.throughput(Throughput::Elements(paths as u64 * 8));
    let fx = random_instance(8, 0.3, 9);
    let mut rng = random::rng(9, 1);
    let f = random::complex_function(&mut rng, 8);
    group.bench_function("8_vertices_t1", |b| {
        b.iter(|| estimate_vector(&fx.graph, &fx.a, &fx.v, &f, 1.0, paths, 3).unwrap())
    });
    group.finish();
}

criterion_group!(benches, simulate, line_integral, fki);
criterion_main!(benches);

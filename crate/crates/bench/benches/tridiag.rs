use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use pe3d::tridiag::{solve, solve_batch};
use pe3d::Topology;
use pe3d_bench::systems;

fn scalar_vs_batch(c: &mut Criterion) {
    for topology in [Topology::Open, Topology::Cyclic] {
        let mut group = c.benchmark_group(format!("tridiag_{topology:?}").to_lowercase());
        for batch in [1usize, 16, 256, 1024] {
            let (list, packed) = systems(batch, 256, topology).unwrap();
            group.throughput(Throughput::Elements(batch as u64));
            group.bench_with_input(BenchmarkId::new("scalar", batch), &list, |b, list| {
                b.iter(|| {
                    for s in list {
                        black_box(solve(s).unwrap());
                    }
                })
            });
            group.bench_with_input(BenchmarkId::new("batched", batch), &packed, |b, packed| {
                b.iter(|| black_box(solve_batch(packed, 1).unwrap()))
            });
        }
        group.finish();
    }
}

criterion_group!(benches, scalar_vs_batch);
criterion_main!(benches);

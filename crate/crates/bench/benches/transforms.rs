use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use fgl_bench::{fixture, SIZES};
use fgl_core::gabor::{riesz_bounds_gram, riesz_bounds_zak};
use fgl_core::localization::beta;
use fgl_core::zak::{zak_forward, zak_inverse};

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("transforms");
    for &(n, l) in SIZES {
        let b = fixture(n, l);
        let z = zak_forward(&b);
        let id = format!("N={n},l={l}");
        group.throughput(Throughput::Elements(b.grid().len() as u64));
        group.bench_with_input(BenchmarkId::new("dft", &id), &b, |bn, b| {
            bn.iter(|| black_box(b.dft()))
        });
        group.bench_with_input(BenchmarkId::new("zak_forward", &id), &b, |bn, b| {
            bn.iter(|| black_box(zak_forward(b)))
        });
        group.bench_with_input(BenchmarkId::new("zak_inverse", &id), &z, |bn, z| {
            bn.iter(|| black_box(zak_inverse(z)))
        });
        group.bench_with_input(BenchmarkId::new("beta", &id), &b, |bn, b| {
            bn.iter(|| black_box(beta(b, 1).unwrap()))
        });
    }
    group.finish();
}

fn bounds(c: &mut Criterion) {
    let mut group = c.benchmark_group("riesz_bounds");
    group.sample_size(10);
    for &(n, l) in &[(8usize, 1usize), (16, 1), (32, 1), (4, 2), (8, 2)] {
        let b = fixture(n, l);
        let id = format!("N={n},l={l}");
        group.bench_with_input(BenchmarkId::new("zak", &id), &b, |bn, b| {
            bn.iter(|| black_box(riesz_bounds_zak(b)))
        });
        group.bench_with_input(BenchmarkId::new("gram", &id), &b, |bn, b| {
            bn.iter(|| black_box(riesz_bounds_gram(b).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, transforms, bounds);
criterion_main!(benches);

//! Compares the data-parallel batch runner against the sequential
//! fallback on the classification workload. Build with the default
//! `parallel` feature to measure rayon dispatch; without it the two
//! paths coincide and the comparison degenerates honestly.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cuspidal::batch::{run_indexed, run_indexed_seq};
use cuspidal::field::Field;
use cuspidal::oracle::{instance_rng, random_lattice};
use cuspidal::ring::Context;

const SEED: u64 = 42;

fn classify_one(ctx: Context, i: usize) -> (usize, usize) {
    let mut rng = instance_rng(SEED, i as u64);
    let m = random_lattice(ctx, 3, &mut rng);
    m.decompose().expect("random instances classify").invariants()
}

fn bench_prime_field(c: &mut Criterion) {
    let ctx = Context::new(Field::Prime(10007), 12).expect("valid context");
    let mut group = c.benchmark_group("classify-gf10007");
    group.measurement_time(Duration::from_secs(10));
    for &n in &[8usize, 32, 128] {
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, &n| {
            b.iter(|| black_box(run_indexed(n, |i| classify_one(ctx, i))));
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| black_box(run_indexed_seq(n, |i| classify_one(ctx, i))));
        });
    }
    group.finish();
}

fn bench_rationals(c: &mut Criterion) {
    let ctx = Context::new(Field::Rational, 12).expect("valid context");
    let mut group = c.benchmark_group("classify-rationals");
    group.sample_size(10);
    group.measurement_time(Duration::from_secs(15));
    let n = 8usize;
    group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, &n| {
        b.iter(|| black_box(run_indexed(n, |i| classify_one(ctx, i))));
    });
    group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
        b.iter(|| black_box(run_indexed_seq(n, |i| classify_one(ctx, i))));
    });
    group.finish();
}

criterion_group!(benches, bench_prime_field, bench_rationals);
criterion_main!(benches);

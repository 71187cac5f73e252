use conelab_bench::fixtures;
use conelab_core::spacetime::rect_complexity;
use conelab_core::{Budget, Coder, Region};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn codes(c: &mut Criterion) {
    let mut group = c.benchmark_group("codes");
    for (name, system) in fixtures() {
        for n in [2usize, 4] {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| {
                    let mut coder = Coder::new(&system, Budget::default());
                    coder.codes(n, Region::RayRight { from: 0 }, 0).unwrap().codes
                })
            });
        }
    }
    group.finish();
}

fn w_plus(c: &mut Criterion) {
    let mut group = c.benchmark_group("w_plus");
    for (name, system) in fixtures() {
        group.bench_function(BenchmarkId::new(name, 6), |b| {
            b.iter(|| Coder::new(&system, Budget::default()).w_plus(6).unwrap())
        });
    }
    group.finish();
}

fn rectangles(c: &mut Criterion) {
    let mut group = c.benchmark_group("rect_complexity");
    group.sample_size(10);
    for (name, system) in fixtures() {
        group.bench_function(BenchmarkId::new(name, "4x4"), |b| {
            b.iter(|| rect_complexity(&mut Coder::new(&system, Budget::default()), 4, 4).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, codes, w_plus, rectangles);
criterion_main!(benches);

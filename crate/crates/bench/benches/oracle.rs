use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use omhl_bench::fixture;
use omhl_core::oracle::brute_force_solve;
use omhl_core::LambdaSpec;
use std::hint::black_box;

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    for (n, p) in [(6, 2), (7, 3), (8, 3)] {
        let (inst, scale, lambda) = fixture(n, p, &LambdaSpec::KCentrum(None), 7);
        group.bench_with_input(BenchmarkId::from_parameter(format!("n{n}p{p}")), &n, |b, _| {
            b.iter(|| brute_force_solve(black_box(&inst), &scale, &lambda).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, oracle);
criterion_main!(benches);

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use equilox::lorenz::mean_difference_gini;
use equilox::sim::posthoc_gini;
use equilox::{compute_gini, rank_coverages, CoverageVector};
use equilox_bench::random_coverages;

fn gini(c: &mut Criterion) {
    let mut group = c.benchmark_group("gini");
    for n in [13, 100, 1000] {
        let v = random_coverages(n as u64, n);
        let cv = CoverageVector::unlabeled(v.clone()).unwrap();
        let uniform = vec![1.0 / n as f64; n];
        group.bench_with_input(BenchmarkId::new("lorenz", n), &cv, |b, cv| {
            b.iter(|| compute_gini(&rank_coverages(black_box(cv))).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("double_sum", n), &v, |b, v| {
            b.iter(|| posthoc_gini(black_box(v)))
        });
        group.bench_with_input(BenchmarkId::new("pairwise", n), &cv, |b, cv| {
            b.iter(|| mean_difference_gini(black_box(cv), &uniform).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, gini);
criterion_main!(benches);

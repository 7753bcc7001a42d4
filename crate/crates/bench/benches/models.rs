use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use equilox::models::build_ranking;
use equilox::{build, derive_demands, fixtures, solve, BuildOptions, Formulation, SolveParams};
use equilox_bench::random_coverages;

fn build_case_study(c: &mut Criterion) {
    let inst = fixtures::serrana();
    let demand = derive_demands(&inst);
    let opts = BuildOptions {
        valid_inequality: true,
        clusterings: None,
    };
    let mut group = c.benchmark_group("build_serrana");
    group.sample_size(20);
    for f in [Formulation::Sp, Formulation::Gmd, Formulation::Gini] {
        group.bench_function(f.as_str(), |b| b.iter(|| build(f, &inst, &demand, &opts).unwrap()));
    }
    group.finish();
}

fn solve_small(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_random");
    group.sample_size(10);
    for n in [3, 5] {
        let inst = fixtures::random_instance(n as u64, n, 2);
        let demand = derive_demands(&inst);
        for f in [Formulation::Sp, Formulation::Gini] {
            let m = build(f, &inst, &demand, &BuildOptions::default()).unwrap();
            group.bench_with_input(BenchmarkId::new(f.as_str(), n), &m, |b, m| {
                b.iter(|| solve(m, &SolveParams::default()))
            });
        }
    }
    group.finish();
}

fn ranking(c: &mut Criterion) {
    let mut group = c.benchmark_group("ranking_subproblem");
    group.sample_size(10);
    for n in [4, 8, 13] {
        let m = build_ranking(&random_coverages(n as u64, n));
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| solve(m, &SolveParams::default()))
        });
    }
    group.finish();
}

criterion_group!(benches, build_case_study, solve_small, ranking);
criterion_main!(benches);

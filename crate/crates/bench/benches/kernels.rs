use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use superorth::identity::distinct_sum;
use superorth::positivity::circle_sum;
use superorth::{compute_coefficients, enumerate_partitions, gen_rademacher, oracle_coefficients, ratios, verify_identity, CostGuard};
use superorth_bench::fixture;

fn partitions(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate_partitions");
    for n in [6usize, 8, 10] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| enumerate_partitions(black_box(n)).unwrap()));
    }
    g.finish();
}

fn coefficients(c: &mut Criterion) {
    let mut g = c.benchmark_group("coefficients");
    for n in [5usize, 7] {
        g.bench_with_input(BenchmarkId::new("recursive", n), &n, |b, &n| b.iter(|| compute_coefficients(n).unwrap()));
        g.bench_with_input(BenchmarkId::new("oracle", n), &n, |b, &n| b.iter(|| oracle_coefficients(n).unwrap()));
    }
    g.finish();
}

fn identity(c: &mut Criterion) {
    let guard = CostGuard::default();
    let mut g = c.benchmark_group("identity");
    g.sample_size(10);
    for r in [1usize, 2, 3] {
        let (b, f) = fixture(6, 2, 2);
        let table = compute_coefficients(2 * r).unwrap();
        g.bench_with_input(BenchmarkId::new("verify", r), &r, |bench, &r| {
            bench.iter(|| verify_identity(&b, &f, r, &table, &guard).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("distinct_sum", r), &r, |bench, &r| {
            bench.iter(|| distinct_sum(&b, &f, 0, r, &guard).unwrap())
        });
    }
    g.finish();
}

fn folding(c: &mut Criterion) {
    let (b, f) = fixture(12, 3, 1);
    let pf = b.certify_positive().unwrap();
    let vs = f.at_atom(0);
    let mut g = c.benchmark_group("circle_sum");
    for m in [2usize, 3, 5] {
        g.bench_with_input(BenchmarkId::from_parameter(m), &m, |bench, &m| bench.iter(|| circle_sum(&pf, &vs, m).unwrap()));
    }
    g.finish();
}

fn rademacher_ratios(c: &mut Criterion) {
    let (b, f) = gen_rademacher(10).unwrap();
    c.bench_function("ratios_rademacher_L10_r2", |bench| bench.iter(|| ratios(&b, &f, 2).unwrap()));
}

criterion_group!(benches, partitions, coefficients, identity, folding, rademacher_ratios);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sqcqp_core::apps::{datasets, omp_baseline, sparse_pca_solve, sparse_regression_solve};
use sqcqp_core::verify::random::{random_correlation, random_regression};

fn pca(c: &mut Criterion) {
    let mut g = c.benchmark_group("sparse_pca");
    let pitprops = datasets::pitprops();
    for k in [5usize, 10] {
        g.bench_function(BenchmarkId::new("pitprops", k), |b| b.iter(|| sparse_pca_solve(&pitprops, k).unwrap()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [50usize, 100, 200] {
        let a = random_correlation(&mut rng, n, 2 * n);
        g.bench_function(BenchmarkId::new("random_k10", n), |b| b.iter(|| sparse_pca_solve(&a, 10).unwrap()));
    }
    g.finish();
}

fn regression(c: &mut Criterion) {
    let mut g = c.benchmark_group("sparse_regression");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [20usize, 50] {
        let (a, y) = random_regression(&mut rng, 4 * n, n, 5);
        g.bench_function(BenchmarkId::new("char_k5", n), |b| b.iter(|| sparse_regression_solve(&a, &y, 5).unwrap()));
        g.bench_function(BenchmarkId::new("omp_k5", n), |b| b.iter(|| omp_baseline(&a, &y, 5).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, pca, regression);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sqcqp_core::charpoly::{conditionals_vector, elem_sym, leave_one_out, leave_one_out_naive};
use sqcqp_core::linalg::{diagonalize, update_diagonalization};
use sqcqp_core::verify::random::{random_symmetric, random_vector};

fn kernels(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut g = c.benchmark_group("kernels");
    for n in [50usize, 200] {
        let x = random_symmetric(&mut rng, n);
        let d = diagonalize(&x).unwrap();
        let lambda: Vec<f64> = d.lambda.iter().copied().collect();
        let v = random_vector(&mut rng, n);
        g.bench_with_input(BenchmarkId::new("elem_sym_k10", n), &lambda, |b, l| b.iter(|| elem_sym(l, 10).unwrap()));
        g.bench_with_input(BenchmarkId::new("leave_one_out_k10", n), &lambda, |b, l| {
            b.iter(|| leave_one_out(l, 10).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("leave_one_out_naive_k10", n), &lambda, |b, l| {
            b.iter(|| leave_one_out_naive(l, 10).unwrap())
        });
        g.bench_function(BenchmarkId::new("conditionals_k10", n), |b| {
            b.iter(|| conditionals_vector(&x, &d, 10).unwrap())
        });
        g.bench_function(BenchmarkId::new("update_diagonalization", n), |b| {
            b.iter(|| update_diagonalization(&d, 0.7, &v).unwrap())
        });
        g.bench_function(BenchmarkId::new("diagonalize", n), |b| b.iter(|| diagonalize(&x).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);

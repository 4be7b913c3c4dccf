//! Seeded random instances.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::SymMatrix;

pub fn random_vector(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn random_gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// `(G + G') / 2` with standard normal `G`.
pub fn random_symmetric(rng: &mut impl Rng, n: usize) -> SymMatrix {
    let g = random_gaussian(rng, n, n);
    SymMatrix::new(g).expect("finite")
}

/// `G G' / n + I / 10`: positive definite with modest condition number.
pub fn random_pd(rng: &mut impl Rng, n: usize) -> SymMatrix {
    let g = random_gaussian(rng, n, n);
    let mut m = &g * g.transpose() / n as f64;
    for i in 0..n {
        m[(i, i)] += 0.1;
    }
    SymMatrix::new(m).expect("finite")
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian with sign fix).
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let qr = random_gaussian(rng, n, n).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Correlation matrix of `samples` draws from a few-factor Gaussian model.
pub fn random_correlation(rng: &mut impl Rng, n: usize, samples: usize) -> SymMatrix {
    let factors = (n / 10).clamp(1, 8);
    let loadings = random_gaussian(rng, factors, n);
    let data = random_gaussian(rng, samples, factors) * loadings + random_gaussian(rng, samples, n);
    let mut cov = DMatrix::zeros(n, n);
    let means: Vec<f64> = (0..n).map(|j| data.column(j).mean()).collect();
    let centered = DMatrix::from_fn(samples, n, |i, j| data[(i, j)] - means[j]);
    cov.gemm_tr(1.0, &centered, &centered, 0.0);
    let sd: Vec<f64> = (0..n).map(|j| cov[(j, j)].sqrt()).collect();
    let corr = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { cov[(i, j)] / (sd[i] * sd[j]) });
    SymMatrix::new(corr).expect("finite")
}

/// Gaussian design and a response with `support` planted coefficients plus noise.
pub fn random_regression(rng: &mut impl Rng, m: usize, n: usize, planted: usize) -> (DMatrix<f64>, DVector<f64>) {
    let a = random_gaussian(rng, m, n);
    let mut x = DVector::zeros(n);
    for i in 0..planted.min(n) {
        x[i] = 1.0 + rng.random::<f64>();
    }
    let b = &a * x + 0.5 * random_vector(rng, m);
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_reproducible() {
        let a = random_symmetric(&mut ChaCha8Rng::seed_from_u64(3), 5);
        let b = random_symmetric(&mut ChaCha8Rng::seed_from_u64(3), 5);
        assert_eq!(a, b);
    }

    #[test]
    fn generators_have_their_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        assert!(random_pd(&mut rng, 7).is_positive_definite());
        let q = random_orthogonal(&mut rng, 6);
        assert!((q.transpose() * &q - DMatrix::<f64>::identity(6, 6)).norm() < 1e-12);
        let c = random_correlation(&mut rng, 30, 60);
        assert!((0..30).all(|i| c.get(i, i) == 1.0));
        assert!(c.max_abs() <= 1.0 + 1e-12);
    }
}

//! Eigendecomposition maintenance under symmetric rank-one updates.
//!
//! Given `X = Q diag(lambda) Q'`, the eigenproblem of `X + rho v v'` reduces to
//! `D + r z z'` with `z = Q'v / ||v||`. Components of `z` that vanish, and
//! pairs of (numerically) repeated eigenvalues, are deflated first; the
//! remaining eigenvalues are the roots of the secular function
//!
//! ```text
//!     f(mu) = 1 + r * sum_j z_j^2 / (d_j - mu)
//! ```
//!
//! Each root is located relative to its nearest pole so that the differences
//! `d_j - mu` keep full relative accuracy. The vector `z` is then recomputed
//! from the computed roots (Löwner's formula), which keeps the assembled
//! eigenvectors orthogonal even when roots crowd against poles.

use nalgebra::{DMatrix, DVector};

use super::{sort_ascending, EigenDecomposition};
use crate::{Error, Result};

/// Relative stopping tolerance for each secular root.
const ROOT_TOL: f64 = 1e-14;
const MAX_ROOT_ITERS: usize = 100;
/// `|(Q'v)_i| <= DEFLATE_Z * ||v||` is treated as zero.
const DEFLATE_Z: f64 = 1e-12;

/// Diagonalization of `X + rho v v'` from a diagonalization of `X`.
///
/// `rho == 0` or `v == 0` returns the input unchanged.
pub fn update_diagonalization(decomp: &EigenDecomposition, rho: f64, v: &DVector<f64>) -> Result<EigenDecomposition> {
    let n = decomp.n();
    if v.len() != n {
        return Err(Error::invalid(format!("update vector has length {}, expected {n}", v.len())));
    }
    if !rho.is_finite() || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("rank-one update has non-finite data"));
    }
    let vnorm = v.norm();
    if rho == 0.0 || vnorm == 0.0 {
        return Ok(decomp.clone());
    }

    let z_full = decomp.q.tr_mul(v) / vnorm;
    let r_signed = rho * vnorm * vnorm;
    let sigma = r_signed.signum();
    let r = r_signed.abs();

    // Work with sigma * lambda ascending, so the update is always positive.
    let order: Vec<usize> = if sigma > 0.0 { (0..n).collect() } else { (0..n).rev().collect() };
    let mut d: Vec<f64> = order.iter().map(|&i| sigma * decomp.lambda[i]).collect();
    let mut z: Vec<f64> = order.iter().map(|&i| z_full[i]).collect();
    let mut w = DMatrix::from_fn(n, n, |i, j| decomp.q[(i, order[j])]);

    let dmax = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol_offdiag = 8.0 * f64::EPSILON * dmax.max(r);

    let mut deflated: Vec<usize> = Vec::new();
    let mut active: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        if z[i].abs() <= DEFLATE_Z {
            z[i] = 0.0;
            deflated.push(i);
            continue;
        }
        if let Some(&p) = active.last() {
            let tau = z[p].hypot(z[i]);
            let c = z[i] / tau;
            let s = z[p] / tau;
            let off = c * s * (d[i] - d[p]);
            if off.abs() <= tol_offdiag {
                // Rotate (p, i) so that z has no weight on p, then drop the coupling.
                let col_p = w.column(p).into_owned();
                let col_i = w.column(i).into_owned();
                w.set_column(p, &(&col_p * c - &col_i * s));
                w.set_column(i, &(&col_p * s + &col_i * c));
                let (dp, di) = (d[p], d[i]);
                d[p] = c * c * dp + s * s * di;
                d[i] = s * s * dp + c * c * di;
                z[p] = 0.0;
                z[i] = tau;
                active.pop();
                deflated.push(p);
            }
        }
        active.push(i);
    }

    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (slot, &p) in deflated.iter().enumerate() {
        values[slot] = sigma * d[p];
        vectors.set_column(slot, &w.column(p));
    }

    let m = active.len();
    if m > 0 {
        let dd: Vec<f64> = active.iter().map(|&i| d[i]).collect();
        let z2: Vec<f64> = active.iter().map(|&i| z[i] * z[i]).collect();
        let roots = secular_roots(&dd, &z2, r);
        let zhat = lowner_z(&dd, &roots, r, active.iter().map(|&i| z[i].signum()));

        let mut u = DMatrix::zeros(m, m);
        for (i, root) in roots.iter().enumerate() {
            let mut col = DVector::from_fn(m, |j, _| zhat[j] / ((dd[j] - dd[root.origin]) - root.tau));
            let norm = col.norm();
            col /= norm;
            u.set_column(i, &col);
        }
        let w_active = DMatrix::from_fn(n, m, |i, j| w[(i, active[j])]);
        let q_active = w_active * u;
        let base = deflated.len();
        for (i, root) in roots.iter().enumerate() {
            values[base + i] = sigma * (dd[root.origin] + root.tau);
            vectors.set_column(base + i, &q_active.column(i));
        }
    }

    Ok(sort_ascending(vectors, values))
}

/// A secular root stored as `d[origin] + tau`, with `d[origin]` the closest pole.
#[derive(Debug, Clone, Copy)]
struct SecularRoot {
    origin: usize,
    tau: f64,
}

fn secular_value(dd: &[f64], z2: &[f64], r: f64, origin: usize, tau: f64) -> (f64, f64) {
    let base = dd[origin];
    let mut f = 1.0;
    let mut df = 0.0;
    for (dj, zj2) in dd.iter().zip(z2) {
        let gap = (dj - base) - tau;
        let q = zj2 / gap;
        f += r * q;
        df += r * q / gap;
    }
    (f, df)
}

/// Roots of `1 + r sum z_j^2 / (d_j - mu)` for strictly increasing `d` and `r > 0`.
fn secular_roots(dd: &[f64], z2: &[f64], r: f64) -> Vec<SecularRoot> {
    let m = dd.len();
    let znorm2: f64 = z2.iter().sum();
    (0..m)
        .map(|i| {
            let (origin, mut lo, mut hi) = if i + 1 < m {
                let half = 0.5 * (dd[i + 1] - dd[i]);
                let (f_mid, _) = secular_value(dd, z2, r, i, half);
                if f_mid >= 0.0 {
                    (i, 0.0, half)
                } else {
                    (i + 1, (dd[i] - dd[i + 1]) + half, 0.0)
                }
            } else {
                (i, 0.0, r * znorm2)
            };
            let mut tau = 0.5 * (lo + hi);
            for _ in 0..MAX_ROOT_ITERS {
                let (f, df) = secular_value(dd, z2, r, origin, tau);
                if f == 0.0 {
                    break;
                }
                if f < 0.0 {
                    lo = tau;
                } else {
                    hi = tau;
                }
                let newton = tau - f / df;
                let next = if newton > lo && newton < hi && newton.is_finite() {
                    newton
                } else {
                    0.5 * (lo + hi)
                };
                let done = (next - tau).abs() <= ROOT_TOL * next.abs() || (hi - lo) <= ROOT_TOL * lo.abs().max(hi.abs());
                tau = next;
                if done {
                    break;
                }
            }
            SecularRoot { origin, tau }
        })
        .collect()
}

/// Recomputes `z` so that the computed roots are exact eigenvalues of `D + r z z'`.
fn lowner_z(dd: &[f64], roots: &[SecularRoot], r: f64, signs: impl Iterator<Item = f64>) -> Vec<f64> {
    let m = dd.len();
    let root_minus = |i: usize, j: usize| (dd[roots[i].origin] - dd[j]) + roots[i].tau;
    signs
        .enumerate()
        .map(|(j, sign)| {
            let mut prod = root_minus(m - 1, j) / r;
            for i in 0..j {
                prod *= root_minus(i, j) / (dd[i] - dd[j]);
            }
            for i in (j + 1)..m {
                prod *= root_minus(i - 1, j) / (dd[i] - dd[j]);
            }
            sign * prod.abs().sqrt()
        })
        .collect()
}

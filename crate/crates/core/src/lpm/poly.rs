//! Univariate polynomials recovered by interpolation, and their largest real root.

use nalgebra::{Complex, DMatrix};

use crate::{Error, Result};

/// Relative threshold below which leading coefficients are dropped.
pub const TRIM_TOL: f64 = 1e-12;
/// Imaginary-part tolerance for accepting a companion eigenvalue as real.
pub const REAL_ROOT_TOL: f64 = 1e-6;
const NEWTON_REL_EPS: f64 = 1e-10;
const NEWTON_MAX_ITERS: usize = 20_000;
/// Extra iterations allowed once the step is below `eps`.
const POLISH_ITERS: usize = 64;
const DERIV_FLOOR: f64 = 1e-300;

/// Center and half-width of the node range, after checking the nodes are
/// pairwise distinct in the scaled variable.
pub(crate) fn check_distinct(nodes: &[f64]) -> Result<(f64, f64)> {
    let lo = nodes.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = nodes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let center = 0.5 * (lo + hi);
    let scale = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };
    let mut sorted: Vec<f64> = nodes.iter().map(|t| (t - center) / scale).collect();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[1] - w[0] <= 1e-14) {
        return Err(Error::invalid("interpolation nodes must be distinct"));
    }
    Ok((center, scale))
}

/// `g(t) = sum_j coeffs[j] * ((t - center) / scale)^j`.
///
/// Coefficients are kept in the affinely scaled variable so that
/// interpolation through nodes spread over a wide interval stays well
/// conditioned; [`UnivariatePoly::to_monomial`] gives plain coefficients.
/// An empty coefficient vector is the zero polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariatePoly {
    coeffs: Vec<f64>,
    center: f64,
    scale: f64,
}

impl UnivariatePoly {
    /// From ascending monomial coefficients in `t`.
    pub fn from_monomial(coeffs: &[f64]) -> Self {
        Self::from_scaled(coeffs.to_vec(), 0.0, 1.0)
    }

    pub fn from_scaled(coeffs: Vec<f64>, center: f64, scale: f64) -> Self {
        let mut p = UnivariatePoly { coeffs, center, scale };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        UnivariatePoly {
            coeffs: Vec::new(),
            center: 0.0,
            scale: 1.0,
        }
    }

    /// Interpolant of degree `< nodes.len()` through `(nodes[i], values[i])`.
    ///
    /// Barycentric weights in the scaled variable, expanded to coefficients by
    /// synthetic division of the node polynomial.
    pub fn interpolate(nodes: &[f64], values: &[f64]) -> Result<Self> {
        let m = nodes.len();
        if m == 0 || m != values.len() {
            return Err(Error::invalid("interpolation needs matching, nonempty nodes and values"));
        }
        if nodes.iter().chain(values).any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite interpolation data"));
        }
        let (center, scale) = check_distinct(nodes)?;
        let s: Vec<f64> = nodes.iter().map(|t| (t - center) / scale).collect();

        // Node polynomial prod_j (s - s_j), ascending.
        let mut full = vec![1.0];
        for &r in &s {
            let mut next = vec![0.0; full.len() + 1];
            for (i, &c) in full.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= r * c;
            }
            full = next;
        }

        let mut coeffs = vec![0.0; m];
        for i in 0..m {
            let w: f64 = (0..m).filter(|&j| j != i).map(|j| s[i] - s[j]).product();
            let factor = values[i] / w;
            if factor == 0.0 {
                continue;
            }
            // full / (s - s_i), from the top down.
            let mut carry = 0.0;
            for d in (0..m).rev() {
                carry = full[d + 1] + s[i] * carry;
                coeffs[d] += factor * carry;
            }
        }
        Ok(Self::from_scaled(coeffs, center, scale))
    }

    fn trim(&mut self) {
        let max = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if max == 0.0 {
            self.coeffs.clear();
            return;
        }
        while let Some(&last) = self.coeffs.last() {
            if last.abs() <= TRIM_TOL * max {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn scaled_coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Drop every term of degree above `deg`.
    pub fn truncate(mut self, deg: usize) -> Self {
        self.coeffs.truncate(deg + 1);
        self.trim();
        self
    }

    /// Multiply by `-1` if needed so the leading coefficient is positive.
    pub fn normalized(mut self) -> Self {
        if self.coeffs.last().is_some_and(|&c| c < 0.0) {
            self.coeffs.iter_mut().for_each(|c| *c = -*c);
        }
        self
    }

    fn to_scaled(&self, t: f64) -> f64 {
        (t - self.center) / self.scale
    }

    fn eval_scaled(&self, s: f64) -> (f64, f64) {
        let mut f = 0.0;
        let mut df = 0.0;
        for &c in self.coeffs.iter().rev() {
            df = df * s + f;
            f = f * s + c;
        }
        (f, df)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_scaled(self.to_scaled(t)).0
    }

    /// `(g(t), g'(t))`.
    pub fn eval_with_derivative(&self, t: f64) -> (f64, f64) {
        let (f, df) = self.eval_scaled(self.to_scaled(t));
        (f, df / self.scale)
    }

    /// `g'` up to the positive factor `1 / scale`, which leaves roots unchanged.
    fn derivative(&self) -> Self {
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(j, c)| j as f64 * c).collect();
        Self::from_scaled(coeffs, self.center, self.scale)
    }

    /// Change in `g(t)` from perturbing each coefficient by `TRIM_TOL`
    /// relative, the accuracy that node sampling supports.
    fn coefficient_noise(&self, t: f64) -> f64 {
        let s = self.to_scaled(t).abs();
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * s + c.abs();
        }
        TRIM_TOL * acc
    }

    /// Ascending coefficients in `t`.
    pub fn to_monomial(&self) -> Vec<f64> {
        let d = self.coeffs.len();
        let mut out = vec![0.0; d];
        // ((t - c)/h)^j expanded one factor at a time.
        let mut power = vec![1.0];
        let a = 1.0 / self.scale;
        let b = -self.center / self.scale;
        for (j, &cj) in self.coeffs.iter().enumerate() {
            if j > 0 {
                let mut next = vec![0.0; power.len() + 1];
                for (i, &p) in power.iter().enumerate() {
                    next[i] += b * p;
                    next[i + 1] += a * p;
                }
                power = next;
            }
            for (i, &p) in power.iter().enumerate() {
                out[i] += cj * p;
            }
        }
        out
    }

    /// Upper bound on the magnitude of every root, in `t` units.
    pub fn cauchy_bound(&self) -> f64 {
        let Some(d) = self.degree() else {
            return self.center;
        };
        if d == 0 {
            return self.center;
        }
        let lead = self.coeffs[d];
        let r = 1.0 + self.coeffs[..d].iter().fold(0.0f64, |m, c| m.max((c / lead).abs()));
        self.center + self.scale * r
    }

    /// All complex roots, in `t` units, from the companion matrix.
    pub fn roots(&self) -> Vec<Complex<f64>> {
        let Some(d) = self.degree() else {
            return Vec::new();
        };
        if d == 0 {
            return Vec::new();
        }
        let lead = self.coeffs[d];
        let mut companion = DMatrix::<f64>::zeros(d, d);
        for i in 1..d {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..d {
            companion[(i, d - 1)] = -self.coeffs[i] / lead;
        }
        companion
            .complex_eigenvalues()
            .iter()
            .map(|z| Complex::new(self.center + self.scale * z.re, self.scale * z.im))
            .collect()
    }

    /// Largest root whose imaginary part is within tolerance of zero.
    pub fn max_real_root_companion(&self) -> Option<f64> {
        self.roots()
            .into_iter()
            .filter(|z| z.im.abs() <= REAL_ROOT_TOL * (1.0 + z.re.abs()))
            .map(|z| z.re)
            .max_by(f64::total_cmp)
    }

    /// `max |g|` over `samples + 1` equispaced points of `[a, b]`.
    pub fn sup_norm_on(&self, a: f64, b: f64, samples: usize) -> f64 {
        let samples = samples.max(1);
        (0..=samples)
            .map(|i| self.eval(a + (b - a) * i as f64 / samples as f64).abs())
            .fold(0.0, f64::max)
    }
}

/// Largest real root, `-inf` when there is none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaResult {
    pub eta: f64,
    /// The root was bracketed by Newton descent (a sign change, or convergence
    /// onto an even-order tangency) rather than read off the companion matrix.
    pub witnessed: bool,
    /// The polynomial vanished identically.
    pub zero_polynomial: bool,
}

impl EtaResult {
    pub fn none() -> Self {
        EtaResult {
            eta: f64::NEG_INFINITY,
            witnessed: false,
            zero_polynomial: false,
        }
    }

    pub fn zero() -> Self {
        EtaResult {
            zero_polynomial: true,
            ..Self::none()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.eta.is_finite()
    }
}

/// Record of the Newton iterates, for monotonicity checks.
#[derive(Debug, Clone, Default)]
pub struct NewtonPath {
    pub iterates: Vec<f64>,
    pub bisected: bool,
    pub fell_back: bool,
}

/// Largest real root of a real-rooted `g`, by Newton's method started above it.
///
/// Returns `s` with `r <= s <= r + eps`, `eps = 1e-10 * max(1, |t0|)`.
/// Past `eps` a short polishing phase runs while the steps still shrink
/// quadratically, and multiple roots are refined through derivatives, so
/// equal roots of different polynomials come out equal to near machine
/// precision.
pub fn max_root_newton(g: &UnivariatePoly, t0: f64) -> EtaResult {
    max_root_newton_traced(g, t0).0
}

pub fn max_root_newton_traced(g: &UnivariatePoly, t0: f64) -> (EtaResult, NewtonPath) {
    let g = g.clone().normalized();
    let (mut res, path) = newton_core(&g, t0);
    if res.zero_polynomial || g.degree().is_none_or(|d| d == 0) || !t0.is_finite() {
        return (res, path);
    }
    if let Some(eta) = refine_multiple(&g, t0, res.eta.is_finite().then_some(res.eta)) {
        if !res.eta.is_finite() {
            res.witnessed = false;
        }
        res.eta = eta;
    }
    (res, path)
}

/// A root of multiplicity `m` is a simple root of `g^(m-1)`, where Newton
/// is accurate to rounding. Walk up the derivatives while their max root
/// still evaluates to zero on `g` within sampling noise.
///
/// Without a real root `s` of `g` itself (a cluster split into complex
/// pairs by noise), the walk starts at the first derivative that passes.
fn refine_multiple(g: &UnivariatePoly, t0: f64, s: Option<f64>) -> Option<f64> {
    let mut best = s;
    let mut d = g.derivative();
    while d.degree().is_some_and(|deg| deg >= 1) {
        let (r, _) = newton_core(&d, t0.max(d.cauchy_bound()));
        let passes = r.eta.is_finite() && g.eval(r.eta).abs() <= g.coefficient_noise(r.eta);
        if passes {
            best = Some(r.eta);
        } else if best.is_some() {
            break;
        }
        d = d.derivative();
    }
    best
}

fn newton_core(g: &UnivariatePoly, t0: f64) -> (EtaResult, NewtonPath) {
    let mut path = NewtonPath::default();
    let Some(deg) = g.degree() else {
        return (EtaResult::zero(), path);
    };
    if deg == 0 || !t0.is_finite() {
        return (EtaResult::none(), path);
    }
    let eps = NEWTON_REL_EPS * t0.abs().max(1.0);
    let floor = |x: f64| 4.0 * f64::EPSILON * (x.abs() + g.scale());
    let found = |eta: f64| EtaResult {
        eta,
        witnessed: true,
        zero_polynomial: false,
    };

    let mut x = t0;
    path.iterates.push(x);
    let (mut f, mut df) = g.eval_with_derivative(x);
    if f <= 0.0 {
        return (fallback(g, &mut path), path);
    }
    let mut polish: Option<(usize, f64)> = None;
    for _ in 0..NEWTON_MAX_ITERS {
        if df <= DERIV_FLOOR {
            return (fallback(g, &mut path), path);
        }
        let step = f / df;
        let next = x - step;
        if next >= x {
            // No further progress in floating point.
            return (found(x), path);
        }
        let (fn_, dfn) = g.eval_with_derivative(next);
        if fn_ <= 0.0 {
            path.bisected = true;
            let (mut lo, mut hi) = (next, x);
            while hi - lo > floor(hi) {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if g.eval(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            path.iterates.push(hi);
            return (found(hi), path);
        }
        x = next;
        f = fn_;
        df = dfn;
        path.iterates.push(x);
        let bound = deg as f64 * step;
        if bound <= floor(x) {
            return (found(x), path);
        }
        // Past eps, keep going only while convergence stays superlinear.
        polish = match polish {
            Some((count, prev)) if count >= POLISH_ITERS || step > 0.5 * prev => return (found(x), path),
            Some((count, _)) => Some((count + 1, step)),
            None if bound <= eps => Some((0, step)),
            None => None,
        };
    }
    (fallback(g, &mut path), path)
}

fn fallback(g: &UnivariatePoly, path: &mut NewtonPath) -> EtaResult {
    path.fell_back = true;
    match g.max_real_root_companion() {
        Some(eta) => EtaResult {
            eta,
            witnessed: false,
            zero_polynomial: false,
        },
        None => EtaResult::none(),
    }
}

/// `n` Chebyshev points of the first kind on `[a, b]`, descending.
pub fn chebyshev_nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (0..n)
        .map(|i| c + h * ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos())
        .collect()
}

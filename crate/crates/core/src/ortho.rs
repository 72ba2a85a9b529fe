//! One-dimensional machinery: Gegenbauer polynomials and zonal harmonics, the
//! smooth cutoff used to filter kernel coefficients, and Gauss-Jacobi rules.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const ARG_TOL: f64 = 1e-12;

/// Gegenbauer index `λ ≥ 0`. `λ = 0` is the Chebyshev limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GegenbauerParam {
    lambda: f64,
}

impl GegenbauerParam {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::usage(format!("Gegenbauer index must be ≥ 0, got {lambda}")));
        }
        Ok(GegenbauerParam { lambda })
    }

    /// `λ = (d − 2)/2` for the sphere `S^{d−1}`.
    pub fn for_sphere_dim(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::usage(format!("sphere dimension must be ≥ 2, got {d}")));
        }
        Self::new((d as f64 - 2.0) / 2.0)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_chebyshev_limit(&self) -> bool {
        self.lambda == 0.0
    }
}

fn check_arg(t: f64) -> Result<()> {
    if t.abs() > 1.0 + ARG_TOL || !t.is_finite() {
        Err(Error::usage(format!("argument {t} outside [-1, 1]")))
    } else {
        Ok(())
    }
}

/// `C_n^λ(t)` by the three-term recurrence
/// `k C_k = 2(k+λ−1) t C_{k−1} − (k+2λ−2) C_{k−2}`, normalized so that
/// `C_n^λ(1) = binom(n+2λ−1, n)`.
pub fn gegenbauer_eval(n: usize, lam: GegenbauerParam, t: f64) -> Result<f64> {
    check_arg(t)?;
    Ok(gegenbauer_raw(n, lam.lambda, t))
}

pub(crate) fn gegenbauer_raw(n: usize, lambda: f64, t: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut c0 = 1.0;
    let mut c1 = 2.0 * lambda * t;
    for k in 2..=n {
        let kf = k as f64;
        let c2 = (2.0 * (kf + lambda - 1.0) * t * c1 - (kf + 2.0 * lambda - 2.0) * c0) / kf;
        c0 = c1;
        c1 = c2;
    }
    c1
}

/// Zonal harmonic `Z_{n,d}(t) = ((n+λ)/λ) C_n^λ(t)` with `λ = (d−2)/2`; the
/// `d = 2` case uses the limit `2 T_n(t)` (and `1` for `n = 0`).
pub fn zonal_eval(n: usize, d: usize, t: f64) -> Result<f64> {
    let lam = GegenbauerParam::for_sphere_dim(d)?;
    check_arg(t)?;
    Ok(zonal_raw(n, lam.lambda, t))
}

pub(crate) fn zonal_raw(n: usize, lambda: f64, t: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if lambda == 0.0 {
        let (mut a, mut b) = (1.0, t);
        for _ in 1..n {
            let c = 2.0 * t * b - a;
            a = b;
            b = c;
        }
        return 2.0 * b;
    }
    (n as f64 + lambda) / lambda * gegenbauer_raw(n, lambda, t)
}

/// Fills `out[k] = Z_k(t)` for `k < out.len()` in one recurrence pass.
pub(crate) fn zonal_all(lambda: f64, t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    if lambda == 0.0 {
        let (mut a, mut b) = (1.0, t);
        out[1] = 2.0 * t;
        for slot in out.iter_mut().skip(2) {
            let c = 2.0 * t * b - a;
            a = b;
            b = c;
            *slot = 2.0 * b;
        }
        return;
    }
    let mut c0 = 1.0;
    let mut c1 = 2.0 * lambda * t;
    out[1] = (1.0 + lambda) / lambda * c1;
    for k in 2..out.len() {
        let kf = k as f64;
        let c2 = (2.0 * (kf + lambda - 1.0) * t * c1 - (kf + 2.0 * lambda - 2.0) * c0) / kf;
        c0 = c1;
        c1 = c2;
        out[k] = (kf + lambda) / lambda * c1;
    }
}

/// `Σ_k a_k Z_k(t)` in one recurrence pass without allocation.
pub(crate) fn zonal_series(coeffs: &[f64], lambda: f64, t: f64) -> f64 {
    let Some(&a0) = coeffs.first() else {
        return 0.0;
    };
    let mut acc = a0;
    if coeffs.len() == 1 {
        return acc;
    }
    if lambda == 0.0 {
        let (mut a, mut b) = (1.0, t);
        acc += coeffs[1] * 2.0 * t;
        for &c in &coeffs[2..] {
            let n = 2.0 * t * b - a;
            a = b;
            b = n;
            acc += c * 2.0 * b;
        }
        return acc;
    }
    let mut c0 = 1.0;
    let mut c1 = 2.0 * lambda * t;
    acc += coeffs[1] * (1.0 + lambda) / lambda * c1;
    for (k, &c) in coeffs.iter().enumerate().skip(2) {
        let kf = k as f64;
        let c2 = (2.0 * (kf + lambda - 1.0) * t * c1 - (kf + 2.0 * lambda - 2.0) * c0) / kf;
        c0 = c1;
        c1 = c2;
        acc += c * (kf + lambda) / lambda * c1;
    }
    acc
}

/// Evaluates `Σ_k a_k Z_k^{(m)}(t)` (the `m`-th derivative of a zonal series).
///
/// Uses `d/dt C_k^λ = 2λ C_{k−1}^{λ+1}`; for `λ = 0` the first derivative of
/// `2T_k` is `2k C_{k−1}^1`.
pub(crate) fn zonal_series_derivative(coeffs: &[f64], lambda: f64, m: usize, t: f64) -> f64 {
    if m == 0 {
        return zonal_series(coeffs, lambda, t);
    }
    if coeffs.len() <= m {
        return 0.0;
    }
    let top = lambda + m as f64;
    // Factor multiplying C_{k−m}^{λ+m} in Z_k^{(m)}.
    let factor = |k: usize| -> f64 {
        let kf = k as f64;
        if lambda == 0.0 {
            let mut f = 2.0 * kf;
            for s in 1..m {
                f *= 2.0 * s as f64;
            }
            f
        } else {
            let mut f = (kf + lambda) / lambda;
            for s in 0..m {
                f *= 2.0 * (lambda + s as f64);
            }
            f
        }
    };
    let mut acc = 0.0;
    let mut c0 = 1.0;
    let mut c1 = 2.0 * top * t;
    for (k, &a) in coeffs.iter().enumerate().skip(m) {
        let j = k - m;
        let cj = match j {
            0 => 1.0,
            1 => c1,
            _ => {
                let jf = j as f64;
                let c2 = (2.0 * (jf + top - 1.0) * t * c1 - (jf + 2.0 * top - 2.0) * c0) / jf;
                c0 = c1;
                c1 = c2;
                c2
            }
        };
        if a != 0.0 {
            acc += a * factor(k) * cj;
        }
    }
    acc
}

/// C^∞ cutoff with `η = 1` on `[0, inner]`, `η = 0` on `[outer, ∞)`, realized
/// as the blend `h(b−x)/(h(b−x) + h(x−a))` with `h(u) = exp(−1/u)` for `u > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffEta {
    inner: f64,
    outer: f64,
}

impl Default for CutoffEta {
    fn default() -> Self {
        CutoffEta { inner: 1.0, outer: 2.0 }
    }
}

fn bump_h(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

impl CutoffEta {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner) {
            return Err(Error::usage(format!(
                "cutoff needs 0 < inner < outer, got ({inner}, {outer})"
            )));
        }
        Ok(CutoffEta { inner, outer })
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.inner {
            return 1.0;
        }
        if x >= self.outer {
            return 0.0;
        }
        let w = self.outer - self.inner;
        let a = bump_h((self.outer - x) / w);
        let b = bump_h((x - self.inner) / w);
        a / (a + b)
    }

    /// Kernel coefficients `η(k/n)` for `k = 0..=2n` (with the default
    /// support; in general up to the last `k` with `k/n < outer`).
    pub fn coefficients(&self, n: usize) -> Vec<f64> {
        let kmax = (self.outer * n as f64).ceil() as usize;
        (0..=kmax).map(|k| self.eval(k as f64 / n as f64)).collect()
    }
}

/// `η(x)` for `x ≥ 0`.
pub fn eta_eval(eta: &CutoffEta, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::usage(format!("cutoff argument must be ≥ 0, got {x}")));
    }
    Ok(eta.eval(x))
}

/// `K_n(t) = Σ_{k=0}^{2n} η(k/n) ((k+λ)/λ) C_k^λ(t)`.
pub fn kernel_kn(n: usize, lam: GegenbauerParam, eta: &CutoffEta, t: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::usage("kernel degree n must be ≥ 1"));
    }
    check_arg(t)?;
    let coeffs = eta.coefficients(n);
    Ok(zonal_series_derivative(&coeffs, lam.lambda, 0, t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaussKind {
    Legendre,
    /// Weight `(1−t)^a (1+t)^b`.
    Jacobi { a: f64, b: f64 },
}

impl GaussKind {
    fn exponents(&self) -> (f64, f64) {
        match *self {
            GaussKind::Legendre => (0.0, 0.0),
            GaussKind::Jacobi { a, b } => (a, b),
        }
    }

    /// `∫_{-1}^{1} (1−t)^a (1+t)^b dt`.
    pub fn total_mass(&self) -> f64 {
        let (a, b) = self.exponents();
        ((a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
            - ln_gamma(a + b + 2.0))
        .exp()
    }
}

/// Gauss rule on `[-1, 1]` for the weight of `kind`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule1D {
    pub kind: GaussKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl GaussRule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_k f(t_k)`, approximating `∫ f(t) w(t) dt`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

/// Jacobi-matrix recurrence coefficients (diagonal, squared off-diagonal) of
/// the orthonormal polynomials for `(1−t)^a(1+t)^b`.
fn jacobi_recurrence(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut diag = Vec::with_capacity(n);
    let mut off2 = Vec::with_capacity(n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let dk = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        diag.push(dk);
        if k >= 1 {
            let e2 = if k == 1 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
            } else {
                4.0 * kf * (kf + a) * (kf + b) * (kf + a + b) / (s * s * (s + 1.0) * (s - 1.0))
            };
            off2.push(e2);
        }
    }
    (diag, off2)
}

/// Number of eigenvalues of the symmetric tridiagonal matrix strictly below `x`.
fn sturm_count(diag: &[f64], off2: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for k in 1..diag.len() {
        let prev = if q == 0.0 { f64::EPSILON * 1e-3 } else { q };
        q = diag[k] - x - off2[k - 1] / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Golub-Welsch construction: nodes are the eigenvalues of the Jacobi matrix
/// (isolated by Sturm-sequence bisection), weights are Christoffel numbers
/// `μ₀ / Σ_j p_j(t_k)²` evaluated with the orthonormal recurrence.
pub fn gauss_rule(kind: GaussKind, npts: usize) -> Result<GaussRule1D> {
    if npts == 0 {
        return Err(Error::usage("Gauss rule needs at least one node"));
    }
    let (a, b) = kind.exponents();
    if !(a > -1.0 && b > -1.0) {
        return Err(Error::usage(format!("Jacobi exponents must exceed -1, got ({a}, {b})")));
    }
    let (diag, off2) = jacobi_recurrence(npts, a, b);
    let mass = kind.total_mass();

    let mut nodes = Vec::with_capacity(npts);
    for k in 0..npts {
        // The k-th eigenvalue is the smallest x with count(x) > k.
        let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(&diag, &off2, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let node = 0.5 * (lo + hi);
        if !(node > -1.0 && node < 1.0) {
            return Err(Error::Convergence(format!(
                "node {k} of {npts} for {kind:?} left (-1, 1): {node}"
            )));
        }
        nodes.push(node);
    }

    let off: Vec<f64> = off2.iter().map(|e| e.sqrt()).collect();
    let weights: Vec<f64> = nodes
        .iter()
        .map(|&t| {
            let mut p_prev = 0.0;
            let mut p = 1.0 / mass.sqrt();
            let mut sum = p * p;
            for j in 0..npts - 1 {
                let b_prev = if j == 0 { 0.0 } else { off[j - 1] };
                let p_next = ((t - diag[j]) * p - b_prev * p_prev) / off[j];
                p_prev = p;
                p = p_next;
                sum += p * p;
            }
            1.0 / sum
        })
        .collect();
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::Convergence(format!(
            "non-positive Christoffel weight for {kind:?}, npts = {npts}"
        )));
    }
    Ok(GaussRule1D {
        kind,
        nodes,
        weights,
        exactness: 2 * npts - 1,
    })
}

/// `binom(x, k)` for real `x`.
pub fn binomial_real(x: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (x - i as f64) / (i as f64 + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn gegenbauer_examples() {
        let half = GegenbauerParam::new(0.5).unwrap();
        assert_abs_diff_eq!(gegenbauer_eval(2, half, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        for lam in [0.25, 0.5, 1.0, 3.5] {
            let p = GegenbauerParam::new(lam).unwrap();
            assert_abs_diff_eq!(gegenbauer_eval(1, p, 0.3).unwrap(), 2.0 * lam * 0.3, epsilon = 1e-15);
            assert_eq!(gegenbauer_eval(0, p, -0.7).unwrap(), 1.0);
        }
        assert!(gegenbauer_eval(3, half, 1.5).is_err());
        assert!(GegenbauerParam::new(-0.1).is_err());
    }

    /// Hypergeometric-series oracle:
    /// `C_n^λ(t) = Σ_k (−1)^k (λ)_{n−k} (2t)^{n−2k} / (k! (n−2k)!)`.
    fn gegenbauer_series(n: usize, lam: f64, t: f64) -> f64 {
        let poch = |x: f64, m: usize| (0..m).fold(1.0, |a, i| a * (x + i as f64));
        let fact = |m: usize| (1..=m).fold(1.0, |a, i| a * i as f64);
        (0..=n / 2)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * poch(lam, n - k) * (2.0 * t).powi((n - 2 * k) as i32)
                    / (fact(k) * fact(n - 2 * k))
            })
            .sum()
    }

    #[test]
    fn recurrence_matches_series_and_closed_form() {
        for &lam in &[0.5, 1.0, 1.5, 2.25] {
            let p = GegenbauerParam::new(lam).unwrap();
            for i in 0..=20 {
                let t = -1.0 + 0.1 * i as f64;
                let c2 = 2.0 * lam * (lam + 1.0) * t * t - lam;
                assert_abs_diff_eq!(gegenbauer_eval(2, p, t).unwrap(), c2, epsilon = 1e-12);
                for n in 0..9 {
                    let s = gegenbauer_series(n, lam, t);
                    assert_abs_diff_eq!(gegenbauer_eval(n, p, t).unwrap(), s, epsilon = 1e-9 * s.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn normalization_at_one() {
        for two_lam in 1..=6 {
            let lam = two_lam as f64 / 2.0;
            let p = GegenbauerParam::new(lam).unwrap();
            for n in 0..=20 {
                let expect = binomial_real(n as f64 + 2.0 * lam - 1.0, n);
                assert_relative_eq!(gegenbauer_eval(n, p, 1.0).unwrap(), expect, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn zonal_examples() {
        for i in 0..11 {
            let t = -1.0 + 0.2 * i as f64;
            assert_abs_diff_eq!(zonal_eval(1, 3, t).unwrap(), 3.0 * t, epsilon = 1e-14);
        }
        for n in 0..30 {
            assert_relative_eq!(zonal_eval(n, 3, 1.0).unwrap(), 2.0 * n as f64 + 1.0, max_relative = 1e-12);
        }
        assert_eq!(zonal_eval(0, 4, 0.3).unwrap(), 1.0);
        // Chebyshev limit on the circle.
        assert_abs_diff_eq!(zonal_eval(3, 2, 0.5f64).unwrap(), 2.0 * (3.0 * 0.5f64.acos()).cos(), epsilon = 1e-14);
    }

    #[test]
    fn zonal_all_matches_single() {
        let mut z = vec![0.0; 12];
        for lam in [0.0, 0.5, 1.0] {
            zonal_all(lam, 0.37, &mut z);
            for (k, v) in z.iter().enumerate() {
                assert_abs_diff_eq!(*v, zonal_raw(k, lam, 0.37), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn series_derivatives_match_finite_differences() {
        let coeffs = [0.3, -1.0, 0.5, 2.0, 0.25, -0.7, 1.1];
        for lam in [0.0, 0.5, 1.0] {
            for m in 1..=3 {
                let t = 0.31;
                let h = 1e-3;
                let f = |s: f64| zonal_series_derivative(&coeffs, lam, m - 1, s);
                let fd = (f(t + h) - f(t - h)) / (2.0 * h);
                let exact = zonal_series_derivative(&coeffs, lam, m, t);
                assert_abs_diff_eq!(exact, fd, epsilon = 1e-4 * exact.abs().max(1.0));
            }
        }
    }

    #[test]
    fn eta_examples() {
        let eta = CutoffEta::default();
        assert_eq!(eta_eval(&eta, 0.5).unwrap(), 1.0);
        assert_eq!(eta_eval(&eta, 2.5).unwrap(), 0.0);
        assert_abs_diff_eq!(eta_eval(&eta, 1.5).unwrap(), 0.5, epsilon = 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = eta.eval(1.0 + i as f64 / 100.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        assert!(eta_eval(&eta, -1.0).is_err());
    }

    #[test]
    fn eta_flat_at_endpoints() {
        let eta = CutoffEta::default();
        let mut last = f64::INFINITY;
        for h in [0.1, 0.05, 0.02, 0.01] {
            let d1 = ((eta.eval(1.0 + h) - eta.eval(1.0 - h)) / (2.0 * h)).abs();
            let d2 = ((eta.eval(2.0 + h) - eta.eval(2.0 - h)) / (2.0 * h)).abs();
            let s1 = ((eta.eval(1.0 + h) - 2.0 * eta.eval(1.0) + eta.eval(1.0 - h)) / (h * h)).abs();
            let m = d1.max(d2).max(s1);
            assert!(m <= last);
            last = m;
        }
        assert!(last < 1e-6);
    }

    #[test]
    fn kernel_examples() {
        let half = GegenbauerParam::new(0.5).unwrap();
        let eta = CutoffEta::default();
        assert_abs_diff_eq!(kernel_kn(1, half, &eta, 1.0).unwrap(), 4.0, epsilon = 1e-13);
        // Direct summation oracle.
        for n in [1, 3, 4, 7] {
            for i in 0..9 {
                let t = -1.0 + 0.25 * i as f64;
                let direct: f64 = (0..=2 * n)
                    .map(|k| eta.eval(k as f64 / n as f64) * (2.0 * k as f64 + 1.0) * gegenbauer_series(k, 0.5, t))
                    .sum();
                let v = kernel_kn(n, half, &eta, t).unwrap();
                assert_abs_diff_eq!(v, direct, epsilon = 1e-10 * direct.abs().max(1.0));
            }
        }
        let top = kernel_kn(4, half, &eta, 1.0).unwrap();
        for i in 0..=200 {
            let t = -1.0 + i as f64 / 100.0;
            assert!(kernel_kn(4, half, &eta, t).unwrap().abs() <= top);
        }
        assert!(kernel_kn(4, half, &eta, (0.2f64).cos()).unwrap().is_finite());
    }

    #[test]
    fn gauss_legendre_small() {
        let r = gauss_rule(GaussKind::Legendre, 1).unwrap();
        assert_abs_diff_eq!(r.nodes[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights[0], 2.0, epsilon = 1e-14);
        let r = gauss_rule(GaussKind::Legendre, 2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(r.nodes[0], -s, epsilon = 1e-15);
        assert_abs_diff_eq!(r.nodes[1], s, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights[0], 1.0, epsilon = 1e-14);
        for k in 0..=3 {
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert_abs_diff_eq!(r.integrate(|t| t.powi(k)), exact, epsilon = 1e-14);
        }
    }

    /// `∫ (1−t²)^{1/2} t^k dt = B(1/2 + ..)` via the Beta-function moment oracle.
    fn semicircle_moment(k: usize) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        // ∫_{-1}^{1} t^k (1-t^2)^{1/2} dt = B((k+1)/2, 3/2)
        let a = (k as f64 + 1.0) / 2.0;
        (ln_gamma(a) + ln_gamma(1.5) - ln_gamma(a + 1.5)).exp()
    }

    #[test]
    fn gauss_jacobi_exact_on_moments() {
        let r = gauss_rule(GaussKind::Jacobi { a: 0.5, b: 0.5 }, 8).unwrap();
        assert_eq!(r.exactness, 15);
        for k in 0..=15 {
            assert_abs_diff_eq!(r.integrate(|t| t.powi(k as i32)), semicircle_moment(k), epsilon = 1e-13);
        }
    }

    #[test]
    fn gauss_rules_mass_and_exactness() {
        let kinds = [
            GaussKind::Legendre,
            GaussKind::Jacobi { a: -0.5, b: -0.5 },
            GaussKind::Jacobi { a: 0.0, b: 1.0 },
            GaussKind::Jacobi { a: -0.5, b: 0.5 },
            GaussKind::Jacobi { a: 1.5, b: 0.0 },
        ];
        for kind in kinds {
            for npts in [1, 2, 5, 17, 64, 200] {
                let r = gauss_rule(kind, npts).unwrap();
                let mass: f64 = r.weights.iter().sum();
                assert_relative_eq!(mass, kind.total_mass(), max_relative = 1e-12);
                assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            }
            // Exactness on the Legendre-moment polynomial t^k via comparison with a much finer rule.
            let coarse = gauss_rule(kind, 6).unwrap();
            let fine = gauss_rule(kind, 40).unwrap();
            for k in 0..=11 {
                let a = coarse.integrate(|t| t.powi(k));
                let b = fine.integrate(|t| t.powi(k));
                assert_abs_diff_eq!(a, b, epsilon = 1e-12 * b.abs().max(1.0));
            }
        }
        assert!(gauss_rule(GaussKind::Legendre, 0).is_err());
        assert!(gauss_rule(GaussKind::Jacobi { a: -1.0, b: 0.0 }, 3).is_err());
    }
}

//! Geometry on `S^{d-1}`: points, plane rotations, product quadrature, `L^p`
//! norms and the rotation difference/derivative operators.
//!
//! Indices are 0-based throughout: the plane `(i, j)` is spanned by `e_i, e_j`.

use std::f64::consts::PI;

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{check_dim, Error, Result};
use crate::func::{Domain, FnHandle};
use crate::ortho::{gauss_rule, GaussKind};
use crate::poly::LinearMap;

const UNIT_TOL: f64 = 1e-12;

/// A point of `S^{d-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let n = norm(&coords);
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::usage(format!("point has norm {n}, not on the unit sphere")));
        }
        Ok(SpherePoint { coords })
    }

    /// Projects a nonzero vector onto the sphere.
    pub fn normalized(coords: Vec<f64>) -> Result<Self> {
        let n = norm(&coords);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::usage("cannot normalize the zero vector"));
        }
        Ok(SpherePoint { coords: coords.into_iter().map(|c| c / n).collect() })
    }

    pub fn basis(d: usize, i: usize) -> Result<Self> {
        if i >= d {
            return Err(Error::usage(format!("basis index {i} out of range for d = {d}")));
        }
        let mut c = vec![0.0; d];
        c[i] = 1.0;
        Ok(SpherePoint { coords: c })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `Q_{i,j,θ}`: rotation by `θ` in the `(e_i, e_j)` plane, carrying `e_i`
/// towards `e_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneRotation {
    pub i: usize,
    pub j: usize,
    pub theta: f64,
}

impl PlaneRotation {
    pub fn new(i: usize, j: usize, theta: f64) -> Result<Self> {
        if i == j {
            return Err(Error::usage(format!("rotation plane needs distinct indices, got ({i}, {j})")));
        }
        Ok(PlaneRotation { i, j, theta })
    }

    pub fn to_linear_map(&self, dim: usize) -> Result<LinearMap> {
        LinearMap::plane_rotation(dim, self.i, self.j, self.theta)
    }

    /// Rotates `x` in place; `x` may be any vector of sufficient length.
    #[inline]
    pub fn apply_in_place(&self, x: &mut [f64]) {
        rotate_plane(x, self.i, self.j, self.theta);
    }
}

#[inline]
pub(crate) fn rotate_plane(x: &mut [f64], i: usize, j: usize, theta: f64) {
    let (s, c) = theta.sin_cos();
    let (a, b) = (x[i], x[j]);
    x[i] = c * a - s * b;
    x[j] = s * a + c * b;
}

/// `Q x` for a point of the sphere. Coordinates other than `i, j` are untouched;
/// the result is renormalized only if rounding drift exceeds `1e-14`.
pub fn rotate(q: &PlaneRotation, x: &SpherePoint) -> Result<SpherePoint> {
    let d = x.dim();
    if q.i >= d || q.j >= d {
        return Err(Error::usage(format!("rotation plane ({}, {}) out of range for d = {d}", q.i, q.j)));
    }
    let mut c = x.coords.clone();
    q.apply_in_place(&mut c);
    let n = norm(&c);
    if (n - 1.0).abs() > 1e-14 {
        c.iter_mut().for_each(|v| *v /= n);
    }
    Ok(SpherePoint { coords: c })
}

/// `|S^{d-1}| = 2π^{d/2} / Γ(d/2)`.
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * (h * PI.ln() - ln_gamma(h)).exp()
}

/// Node layout of a product rule, kept so that separable transforms can
/// reuse the structure.
#[derive(Debug, Clone, PartialEq)]
pub enum RuleLayout {
    /// `n` equispaced angles on the circle.
    Circle { n: usize },
    /// Gauss-Legendre rings in `x_3 = z` times `nphi` equispaced azimuths;
    /// points are ordered ring-major.
    Rings { z: Vec<f64>, z_weights: Vec<f64>, nphi: usize },
    /// Gauss-Jacobi(½,½) in the last coordinate times an `S^2` ring rule.
    Polar4 { t: Vec<f64>, inner_len: usize },
}

/// Quadrature on `S^{d-1}` for surface measure; `Σ w_k = |S^{d-1}|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub exactness: usize,
    pub total_mass: f64,
    pub layout: RuleLayout,
}

impl SphereRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Typical geodesic spacing between neighbouring nodes.
    pub fn spacing(&self) -> f64 {
        PI / (self.exactness as f64 / 2.0 + 1.0)
    }

    pub fn domain(&self) -> Domain {
        Domain::Sphere(self.dim)
    }

    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn integrate(&self, f: &FnHandle) -> Result<f64> {
        let v = values_on(f, &self.points)?;
        Ok(self.integrate_values(&v))
    }
}

/// Evaluates `f` at every point (in parallel), surfacing the first bad node.
pub fn values_on(f: &FnHandle, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    if let Some(x) = points.first() {
        check_dim(f.dim(), x.len())?;
    }
    points
        .par_iter()
        .enumerate()
        .map(|(k, x)| {
            let v = f.call(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Evaluation { node: k, value: v })
            }
        })
        .collect()
}

/// Product rule on `S^{d-1}` exact for polynomials of degree `≤ degree`.
pub fn sphere_rule(d: usize, degree: usize) -> Result<SphereRule> {
    if degree > 512 {
        return Err(Error::usage(format!("sphere rule degree {degree} exceeds 512")));
    }
    match d {
        2 => {
            let n = degree + 1;
            let w = 2.0 * PI / n as f64;
            let points = (0..n)
                .map(|k| {
                    let a = 2.0 * PI * (k as f64 + 0.5) / n as f64;
                    vec![a.cos(), a.sin()]
                })
                .collect();
            Ok(SphereRule {
                dim: 2,
                points,
                weights: vec![w; n],
                exactness: degree,
                total_mass: 2.0 * PI,
                layout: RuleLayout::Circle { n },
            })
        }
        3 => {
            let nz = degree / 2 + 1;
            let nphi = degree + 1;
            let g = gauss_rule(GaussKind::Legendre, nz)?;
            let dphi = 2.0 * PI / nphi as f64;
            let mut points = Vec::with_capacity(nz * nphi);
            let mut weights = Vec::with_capacity(nz * nphi);
            for (&z, &wz) in g.nodes.iter().zip(&g.weights) {
                let rho = (1.0 - z * z).sqrt();
                for k in 0..nphi {
                    let a = dphi * (k as f64 + 0.5);
                    points.push(vec![rho * a.cos(), rho * a.sin(), z]);
                    weights.push(wz * dphi);
                }
            }
            Ok(SphereRule {
                dim: 3,
                points,
                weights,
                exactness: degree,
                total_mass: 4.0 * PI,
                layout: RuleLayout::Rings { z: g.nodes, z_weights: g.weights, nphi },
            })
        }
        4 => {
            let inner = sphere_rule(3, degree)?;
            let nt = degree / 2 + 1;
            let g = gauss_rule(GaussKind::Jacobi { a: 0.5, b: 0.5 }, nt)?;
            let mut points = Vec::with_capacity(nt * inner.len());
            let mut weights = Vec::with_capacity(nt * inner.len());
            for (&t, &wt) in g.nodes.iter().zip(&g.weights) {
                let rho = (1.0 - t * t).sqrt();
                for (p, &w) in inner.points.iter().zip(&inner.weights) {
                    points.push(vec![rho * p[0], rho * p[1], rho * p[2], t]);
                    weights.push(wt * w);
                }
            }
            Ok(SphereRule {
                dim: 4,
                points,
                weights,
                exactness: degree,
                total_mass: 2.0 * PI * PI,
                layout: RuleLayout::Polar4 { t: g.nodes, inner_len: inner.len() },
            })
        }
        _ => Err(Error::usage(format!("sphere rules support d ∈ {{2, 3, 4}}, got {d}"))),
    }
}

/// Options for the `p = ∞` grid supremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupOptions {
    /// Run a compass search from the best nodes.
    pub refine: bool,
    /// Number of best nodes used as starting points.
    pub seeds: usize,
    /// Evaluation budget per seed.
    pub budget: usize,
}

impl Default for SupOptions {
    fn default() -> Self {
        SupOptions { refine: true, seeds: 6, budget: 600 }
    }
}

impl SupOptions {
    pub fn grid_only() -> Self {
        SupOptions { refine: false, ..Self::default() }
    }
}

/// Projection used by the compass search.
pub(crate) fn project_to(domain: Domain, x: &mut [f64]) {
    let n = norm(x);
    match domain {
        Domain::Sphere(_) => {
            if n > 0.0 {
                x.iter_mut().for_each(|v| *v /= n);
            }
        }
        Domain::Ball(_) => {
            if n > 1.0 {
                x.iter_mut().for_each(|v| *v /= n);
            }
        }
    }
}

/// Maximizes `g` over the domain by compass search from the `seeds` best
/// sample points. The result is a lower bound of the true supremum that is at
/// least the sampled maximum.
pub fn refine_sup(
    g: &(dyn Fn(&[f64]) -> f64 + Sync),
    domain: Domain,
    points: &[Vec<f64>],
    values: &[f64],
    step0: f64,
    opts: &SupOptions,
) -> f64 {
    let mut best = values.iter().cloned().fold(0.0_f64, f64::max);
    if !opts.refine || points.is_empty() {
        return best;
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let d = points[0].len();
    let results: Vec<f64> = order
        .iter()
        .take(opts.seeds)
        .map(|&k| {
            let mut x = points[k].clone();
            let mut fx = values[k];
            let mut step = step0;
            let mut evals = 0;
            let mut trial = vec![0.0; d];
            while step > 1e-12 && evals < opts.budget {
                let mut improved = false;
                for axis in 0..d {
                    for sign in [1.0, -1.0] {
                        trial.copy_from_slice(&x);
                        trial[axis] += sign * step;
                        project_to(domain, &mut trial);
                        let v = g(&trial);
                        evals += 1;
                        if v.is_finite() && v > fx {
                            fx = v;
                            x.copy_from_slice(&trial);
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            fx
        })
        .collect();
    for v in results {
        best = best.max(v);
    }
    best
}

/// [`refine_sup`] with extra starting points that always take part in the search.
pub fn refine_sup_seeded(
    g: &(dyn Fn(&[f64]) -> f64 + Sync),
    domain: Domain,
    points: &[Vec<f64>],
    values: &[f64],
    seeds: &[Vec<f64>],
    step0: f64,
    opts: &SupOptions,
) -> f64 {
    let base = refine_sup(g, domain, points, values, step0, opts);
    if seeds.is_empty() {
        return base;
    }
    let sv: Vec<f64> = seeds.iter().map(|x| g(x)).map(|v| if v.is_finite() { v } else { 0.0 }).collect();
    let o = SupOptions { seeds: seeds.len(), ..*opts };
    base.max(refine_sup(g, domain, seeds, &sv, step0, &o))
}

/// Discrete `L^p` norm from values and weights (`p = ∞` gives the plain max).
pub fn lp_from_values(values: &[f64], weights: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    }
    let s: f64 = values.iter().zip(weights).map(|(v, w)| w * v.abs().powf(p)).sum();
    s.powf(1.0 / p)
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::usage(format!("norm exponent must satisfy 1 ≤ p ≤ ∞, got {p}")))
    }
}

/// `‖f‖_{L^p(S^{d-1})}` by quadrature; `p = ∞` is a grid supremum refined
/// around the best nodes.
pub fn lp_norm_sphere(f: &FnHandle, p: f64, rule: &SphereRule) -> Result<f64> {
    lp_norm_sphere_opts(f, p, rule, &SupOptions::default())
}

pub fn lp_norm_sphere_opts(f: &FnHandle, p: f64, rule: &SphereRule, opts: &SupOptions) -> Result<f64> {
    check_p(p)?;
    check_dim(rule.dim, f.dim())?;
    let v = values_on(f, &rule.points)?;
    if p.is_infinite() {
        let a: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        let g = |x: &[f64]| f.call(x).abs();
        return Ok(refine_sup_seeded(&g, rule.domain(), &rule.points, &a, f.hotspots(), rule.spacing(), opts));
    }
    Ok(lp_from_values(&v, &rule.weights, p))
}

/// Binomial coefficient as a float.
pub(crate) fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Δ^r_{i,j,θ} f(x) = Σ_k (−1)^k C(r,k) f(Q_{i,j,kθ} x)`.
pub fn forward_diff(f: &FnHandle, r: usize, i: usize, j: usize, theta: f64, x: &[f64]) -> Result<f64> {
    check_dim(f.dim(), x.len())?;
    check_plane(f.dim(), i, j)?;
    if r == 0 {
        return Err(Error::usage("difference order must be ≥ 1"));
    }
    if theta.abs() > PI {
        return Err(Error::usage(format!("rotation step |θ| = {} exceeds π", theta.abs())));
    }
    let g = |y: &[f64]| f.call(y);
    Ok(forward_diff_raw(&g, r, i, j, theta, x))
}

pub(crate) fn check_plane(d: usize, i: usize, j: usize) -> Result<()> {
    if i == j || i >= d || j >= d {
        Err(Error::usage(format!("invalid index pair ({i}, {j}) for d = {d}")))
    } else {
        Ok(())
    }
}

pub(crate) fn forward_diff_raw(
    f: &dyn Fn(&[f64]) -> f64,
    r: usize,
    i: usize,
    j: usize,
    theta: f64,
    x: &[f64],
) -> f64 {
    let mut y = x.to_vec();
    let mut acc = 0.0;
    for k in 0..=r {
        if k > 0 {
            rotate_plane(&mut y, i, j, theta);
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom(r, k) * f(&y);
    }
    acc
}

/// Fornberg's finite-difference weights: `w[m][k]` approximates the `m`-th
/// derivative at `x0` from samples at `nodes[k]`, for `m ≤ max_order`.
pub fn fd_weights(x0: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Central stencil `{−q..q}·h` with weights for the `r`-th derivative.
pub(crate) fn central_stencil(r: usize, q: usize, h: f64) -> (Vec<f64>, Vec<f64>) {
    let offsets: Vec<f64> = (-(q as i64)..=q as i64).map(|k| k as f64 * h).collect();
    let w = fd_weights(0.0, &offsets, r);
    (offsets, w[r].clone())
}

/// Half-width giving a fourth-order central stencil for the `r`-th derivative.
pub(crate) fn default_half_width(r: usize) -> usize {
    (r + 1) / 2 + 1
}

/// `D^r_{i,j} f(x)` as the `r`-th derivative of `t ↦ f(Q_{i,j,−t} x)` at `0`,
/// by a fourth-order central stencil with step `h`.
pub fn dij_num(f: &FnHandle, r: usize, i: usize, j: usize, x: &[f64], h: f64) -> Result<f64> {
    check_dim(f.dim(), x.len())?;
    check_plane(f.dim(), i, j)?;
    if !(1e-4..=1e-1).contains(&h) {
        return Err(Error::usage(format!("finite-difference step {h} outside [1e-4, 1e-1]")));
    }
    let g = |y: &[f64]| f.call(y);
    Ok(dij_num_raw(&g, r, i, j, x, h, default_half_width(r)))
}

/// Angular derivative with an explicit stencil half-width `q` (order `2q + 1 − r`
/// rounded down to even).
pub(crate) fn dij_num_raw(
    f: &dyn Fn(&[f64]) -> f64,
    r: usize,
    i: usize,
    j: usize,
    x: &[f64],
    h: f64,
    q: usize,
) -> f64 {
    if r == 0 {
        return f(x);
    }
    let (offsets, w) = central_stencil(r, q, h);
    let mut y = vec![0.0; x.len()];
    let mut acc = 0.0;
    for (t, wk) in offsets.iter().zip(&w) {
        if *wk == 0.0 {
            continue;
        }
        y.copy_from_slice(x);
        rotate_plane(&mut y, i, j, -t);
        acc += wk * f(&y);
    }
    acc
}

/// Tangential partial derivative `−Σ_{i≠j} x_i D_{i,j} f(x)`, which equals
/// `∂_j f − x_j ⟨x, ∇f⟩` for smooth extensions.
pub fn tangential_partial(f: &FnHandle, j: usize, x: &[f64], h: f64) -> Result<f64> {
    check_dim(f.dim(), x.len())?;
    if j >= f.dim() {
        return Err(Error::usage(format!("index {j} out of range for d = {}", f.dim())));
    }
    let mut acc = 0.0;
    for i in 0..f.dim() {
        if i != j && x[i] != 0.0 {
            acc -= x[i] * dij_num(f, 1, i, j, x, h)?;
        }
    }
    Ok(acc)
}

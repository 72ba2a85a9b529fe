//! Weighted geometry of the unit ball `B^d`: the weights `W_μ`, product
//! quadrature, weighted norms, the trivial extension `f̃` to `B^{d+1}`, the
//! explicit form of `D^r_{i,d+1} f̃` and the φ-scaled central differences.
//!
//! On `B^{d+1}` the angular derivative in the `(i, d+1)` plane is taken as
//! `x_i ∂_{d+1} − x_{d+1} ∂_i`, for which `D_{i,d+1} f̃ = −x_{d+1} ∂_i f`.
//! Norms over the lifted domains (`S^d` or `B^{d+1}`) carry a factor `1/2` on
//! the measure, so that a function even in `x_{d+1}` has the same `L^p` norm as
//! its restriction measured on `B^d`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{check_dim, Error, Result};
use crate::func::{Domain, FnHandle};
use crate::ortho::{gauss_rule, GaussKind};
use crate::poly::{dij_pow_poly, MultiPoly};
use crate::sphere::{
    binom, fd_weights, check_p, dij_num_raw, lp_from_values, norm, refine_sup_seeded, sphere_rule, values_on, SphereRule,
    SupOptions,
};

/// `W_μ(x) = (1 − ‖x‖²)^{μ−1/2}` on `B^d` with its normalization `a_μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallWeight {
    d: usize,
    mu: f64,
    m: Option<usize>,
    a_mu: f64,
}

/// `∫_{B^d} W_μ dx = π^{d/2} Γ(μ + 1/2) / Γ(μ + (d+1)/2)`.
pub fn ball_mass(d: usize, mu: f64) -> f64 {
    let df = d as f64;
    (0.5 * df * PI.ln() + ln_gamma(mu + 0.5) - ln_gamma(mu + 0.5 * (df + 1.0))).exp()
}

impl BallWeight {
    pub fn new(d: usize, mu: f64) -> Result<Self> {
        if d == 0 || !(mu >= 0.0) {
            return Err(Error::usage(format!("ball weight needs d ≥ 1 and μ ≥ 0, got d = {d}, μ = {mu}")));
        }
        let two = 2.0 * mu + 1.0;
        let m = (two.fract() == 0.0).then_some(two as usize);
        Ok(BallWeight { d, mu, m, a_mu: 1.0 / ball_mass(d, mu) })
    }

    /// `μ = (m − 1)/2`.
    pub fn from_lift(d: usize, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::usage("lift dimension m must be positive"));
        }
        Self::new(d, (m as f64 - 1.0) / 2.0)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn m(&self) -> Option<usize> {
        self.m
    }

    pub fn a_mu(&self) -> f64 {
        self.a_mu
    }

    pub fn mass(&self) -> f64 {
        1.0 / self.a_mu
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (1.0 - r2).max(0.0).powf(self.mu - 0.5)
    }
}

/// Supported lift dimension `m ∈ {1, 2}` for `μ`.
pub(crate) fn lift_m(mu: f64) -> Result<usize> {
    if mu == 0.0 {
        Ok(1)
    } else if mu == 0.5 {
        Ok(2)
    } else {
        Err(Error::usage(format!("μ = {mu} unsupported; use μ ∈ {{0, 1/2}}")))
    }
}

/// Product rule on `B^d` with the weight `W_μ` folded into the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BallRule {
    pub dim: usize,
    pub mu: f64,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub exactness: usize,
    pub total_mass: f64,
}

impl BallRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn domain(&self) -> Domain {
        Domain::Ball(self.dim)
    }

    /// Typical node spacing, the initial step of sup refinement.
    pub fn spacing(&self) -> f64 {
        PI / (self.exactness as f64 + 1.0)
    }

    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    pub fn integrate(&self, f: &FnHandle) -> Result<f64> {
        check_dim(self.dim, f.dim())?;
        Ok(self.integrate_values(&values_on(f, &self.points)?))
    }
}

/// Polar rule: Gauss–Jacobi in `u = r²` against `u^{d/2−1}(1−u)^{μ−1/2}`
/// times a sphere rule; exact for polynomials of degree `≤ degree`.
pub fn ball_rule(d: usize, mu: f64, degree: usize) -> Result<BallRule> {
    if !(1..=3).contains(&d) {
        return Err(Error::usage(format!("ball rules support d ∈ {{1, 2, 3}}, got {d}")));
    }
    if degree > 512 {
        return Err(Error::usage(format!("ball rule degree {degree} exceeds 512")));
    }
    let w = BallWeight::new(d, mu)?;
    let npts = (degree / 2 + 2) / 2;
    let df = d as f64;
    let g = gauss_rule(GaussKind::Jacobi { a: mu - 0.5, b: 0.5 * df - 1.0 }, npts.max(1))?;
    // dx = r^{d−1} dr dσ, u = r² = (1+t)/2.
    let scale = 2f64.powf(-2.0 - 0.5 * (df - 2.0) - (mu - 0.5));
    let (dirs, dir_w): (Vec<Vec<f64>>, Vec<f64>) = if d == 1 {
        (vec![vec![1.0], vec![-1.0]], vec![1.0, 1.0])
    } else {
        let s = sphere_rule(d, degree)?;
        (s.points, s.weights)
    };
    let mut points = Vec::with_capacity(g.len() * dirs.len());
    let mut weights = Vec::with_capacity(g.len() * dirs.len());
    for (&t, &wt) in g.nodes.iter().zip(&g.weights) {
        let r = ((1.0 + t) / 2.0).sqrt();
        for (xi, &wx) in dirs.iter().zip(&dir_w) {
            points.push(xi.iter().map(|v| r * v).collect());
            weights.push(scale * wt * wx);
        }
    }
    Ok(BallRule { dim: d, mu, points, weights, exactness: degree, total_mass: w.mass() })
}

/// `‖f‖_{p,μ}` (unnormalized); `p = ∞` is the plain supremum.
pub fn lp_norm_ball(f: &FnHandle, p: f64, rule: &BallRule) -> Result<f64> {
    lp_norm_ball_opts(f, p, rule, &SupOptions::default())
}

pub fn lp_norm_ball_opts(f: &FnHandle, p: f64, rule: &BallRule, opts: &SupOptions) -> Result<f64> {
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

/// `φ(x) = √(1 − ‖x‖²)`.
pub fn phi_eval(x: &[f64]) -> Result<f64> {
    let n = norm(x);
    if n > 1.0 + 1e-12 {
        return Err(Error::usage(format!("point of norm {n} lies outside the ball")));
    }
    Ok(phi_raw(x))
}

pub(crate) fn phi_raw(x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (1.0 - r2).max(0.0).sqrt()
}

/// The trivial extension `f̃(x, x_{d+1}) = f(x)` of a function on `B^d`.
#[derive(Debug, Clone)]
pub struct ExtendedFn {
    base: FnHandle,
    lifted: FnHandle,
}

impl ExtendedFn {
    /// Extension to `B^{d+1}`.
    pub fn new(f: &FnHandle) -> Result<Self> {
        Self::with_domain(f, Domain::Ball(f.dim() + 1))
    }

    /// Extension restricted to `S^d`.
    pub fn on_sphere(f: &FnHandle) -> Result<Self> {
        Self::with_domain(f, Domain::Sphere(f.dim() + 1))
    }

    fn with_domain(f: &FnHandle, target: Domain) -> Result<Self> {
        if !matches!(f.domain(), Domain::Ball(_)) {
            return Err(Error::usage(format!("extension needs a function on a ball, got {}", f.domain())));
        }
        let mut lifted = f.extend_trailing(target)?;
        for h in lifted_hotspots(f, target) {
            lifted = lifted.with_hotspot(h);
        }
        Ok(ExtendedFn { base: f.clone(), lifted })
    }

    pub fn base(&self) -> &FnHandle {
        &self.base
    }

    pub fn handle(&self) -> &FnHandle {
        &self.lifted
    }

    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        self.lifted.eval(y)
    }
}

/// `Σ_k φ^k P_k(x)`: the algebra generated by polynomials and `φ` on `B^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiPoly {
    dim: usize,
    terms: BTreeMap<u32, MultiPoly>,
}

impl PhiPoly {
    pub fn from_poly(p: &MultiPoly) -> Self {
        let mut terms = BTreeMap::new();
        if !p.is_zero() {
            terms.insert(0, p.clone());
        }
        PhiPoly { dim: p.dim(), terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &MultiPoly)> {
        self.terms.iter().map(|(k, p)| (*k, p))
    }

    /// `−φ ∂_i`, using `−φ ∂_i(φ^k P) = k x_i φ^{k−1} P − φ^{k+1} ∂_i P`.
    pub fn neg_phi_partial(&self, i: usize) -> Result<Self> {
        let mut out: BTreeMap<u32, MultiPoly> = BTreeMap::new();
        let mut add = |k: u32, q: MultiPoly| {
            if q.is_zero() {
                return;
            }
            let e = out.entry(k).or_insert_with(|| MultiPoly::zero(self.dim));
            *e = &*e + &q;
        };
        for (&k, p) in &self.terms {
            if k > 0 {
                add(k - 1, p.mul_var(i).scale(k as f64));
            }
            add(k + 1, p.partial(i)?.scale(-1.0));
        }
        out.retain(|_, p| !p.is_zero());
        Ok(PhiPoly { dim: self.dim, terms: out })
    }

    pub fn add(&self, other: &PhiPoly) -> PhiPoly {
        let mut terms = self.terms.clone();
        for (&k, p) in &other.terms {
            let e = terms.entry(k).or_insert_with(|| MultiPoly::zero(self.dim));
            *e = &*e + p;
        }
        terms.retain(|_, p| !p.is_zero());
        PhiPoly { dim: self.dim, terms }
    }

    pub fn mul_phi(&self) -> PhiPoly {
        PhiPoly { dim: self.dim, terms: self.terms.iter().map(|(&k, p)| (k + 1, p.clone())).collect() }
    }

    pub fn scale(&self, c: f64) -> PhiPoly {
        let mut terms: BTreeMap<u32, MultiPoly> = self.terms.iter().map(|(&k, p)| (k, p.scale(c))).collect();
        terms.retain(|_, p| !p.is_zero());
        PhiPoly { dim: self.dim, terms }
    }

    pub fn eval_with_phi(&self, x: &[f64], phi: f64) -> f64 {
        self.terms.iter().map(|(&k, p)| phi.powi(k as i32) * p.eval_unchecked(x)).sum()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_with_phi(x, phi_raw(x))
    }
}

/// `(−φ ∂_i)^r p` exactly.
pub fn neg_phi_di_pow(p: &MultiPoly, i: usize, r: usize) -> Result<PhiPoly> {
    if i >= p.dim() {
        return Err(Error::usage(format!("index {i} out of range for d = {}", p.dim())));
    }
    let mut q = PhiPoly::from_poly(p);
    for _ in 0..r {
        q = q.neg_phi_partial(i)?;
    }
    Ok(q)
}

/// Step of the rotation stencil used for numerical `D^r_{i,d+1} f̃`.
pub const ROTATION_STEP: f64 = 1e-2;

pub(crate) fn stencil_half_width(r: usize) -> usize {
    (r + 1) / 2 + 2
}

fn check_did1(d: usize, r: usize, i: usize) -> Result<()> {
    if i >= d {
        return Err(Error::usage(format!("index {i} out of range for d = {d}")));
    }
    if r > 4 {
        return Err(Error::usage(format!("derivative order {r} exceeds 4")));
    }
    Ok(())
}

/// `(D^r_{i,d+1} f̃)(y)` for `y ∈ B^{d+1}`, by the explicit formula
/// `(−φ(x) ∂_i)^r [f(s x)]` with `y = s (x, φ(x))`. Polynomial handles are
/// evaluated exactly; other handles by a rotation stencil in the `(i, d+1)`
/// plane. Points with `y_{d+1} < 0` use the parity `(−1)^r`.
pub fn d_id1_tilde(f: &FnHandle, r: usize, i: usize, y: &[f64]) -> Result<f64> {
    let d = f.dim();
    check_dim(d + 1, y.len())?;
    check_did1(d, r, i)?;
    let s = norm(y);
    if s > 1.0 + 1e-12 {
        return Err(Error::usage(format!("point of norm {s} lies outside B^{}", d + 1)));
    }
    Ok(d_id1_raw(f, r, i, y, f.poly().map(|p| (p, None))))
}

fn d_id1_raw(f: &FnHandle, r: usize, i: usize, y: &[f64], poly: Option<(&MultiPoly, Option<&PhiPoly>)>) -> f64 {
    let d = f.dim();
    let s = norm(y).min(1.0);
    if s == 0.0 {
        return if r == 0 { f.call(&y[..d]) } else { 0.0 };
    }
    let sign = if y[d] < 0.0 && r % 2 == 1 { -1.0 } else { 1.0 };
    if let Some((p, pre)) = poly {
        let x: Vec<f64> = y[..d].iter().map(|v| v / s).collect();
        let phi = y[d].abs() / s;
        let val = match pre {
            Some(q) if s == 1.0 => q.eval_with_phi(&x, phi),
            _ => neg_phi_di_pow(&p.scale_argument(s), i, r).map(|q| q.eval_with_phi(&x, phi)).unwrap_or(f64::NAN),
        };
        return sign * val;
    }
    let mut ya = y.to_vec();
    ya[d] = y[d].abs();
    let g = |z: &[f64]| f.call(&z[..d]);
    // Plane (d+1, i): x_i ∂_{d+1} − x_{d+1} ∂_i.
    sign * dij_num_raw(&g, r, d, i, &ya, ROTATION_STEP, stencil_half_width(r))
}

/// `D^r_{i,d+1} f̃` as a handle on `target` (`S^d` or `B^{d+1}`).
pub fn d_id1_tilde_handle(f: &FnHandle, r: usize, i: usize, target: Domain) -> Result<FnHandle> {
    let d = f.dim();
    check_did1(d, r, i)?;
    check_dim(d + 1, target.dim())?;
    let g = f.clone();
    let name = format!("D^{r}_{},{}~[{}]", i + 1, d + 1, f.name());
    if let Some(p) = f.poly() {
        let p = p.clone();
        let pre = neg_phi_di_pow(&p, i, r)?;
        return Ok(FnHandle::new(target, name, move |y| d_id1_raw(&g, r, i, y, Some((&p, Some(&pre))))));
    }
    Ok(FnHandle::new(target, name, move |y| d_id1_raw(&g, r, i, y, None)))
}

/// `D^r_{i,d+1} f̃` computed directly on the extension: symbolically for
/// polynomials (without the explicit formula), by rotation stencil otherwise.
pub fn d_id1_direct_handle(f: &FnHandle, r: usize, i: usize, target: Domain) -> Result<FnHandle> {
    let d = f.dim();
    check_did1(d, r, i)?;
    check_dim(d + 1, target.dim())?;
    let name = format!("D^{r}_{},{}~[{}]", i + 1, d + 1, f.name());
    if let Some(p) = f.poly() {
        let q = dij_pow_poly(&p.extend_dim(d + 1), d, i, r as u32)?;
        return FnHandle::from_poly(target, name, q);
    }
    let g = f.clone();
    let q = stencil_half_width(r);
    Ok(FnHandle::new(target, name, move |y| {
        dij_num_raw(&|z: &[f64]| g.call(&z[..d]), r, d, i, y, ROTATION_STEP, q)
    }))
}

/// Largest `δ` with `x ± δ e_i ∈ B^d`.
fn chord_margin(x: &[f64], i: usize) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let rest = (1.0 - r2 + x[i] * x[i]).max(0.0).sqrt();
    (rest - x[i].abs()).max(0.0)
}

/// Coefficients `c_k` with `(−φ ∂_i)^r g = Σ_k c_k ∂_i^k g`.
pub(crate) fn neg_phi_di_expansion(d: usize, i: usize, r: usize) -> Result<Vec<PhiPoly>> {
    let mut c = vec![PhiPoly::from_poly(&MultiPoly::constant(d, 1.0))];
    for _ in 0..r {
        let mut next: Vec<PhiPoly> = c.iter().map(|q| q.neg_phi_partial(i)).collect::<Result<_>>()?;
        next.push(PhiPoly { dim: d, terms: BTreeMap::new() });
        for (k, q) in c.iter().enumerate() {
            next[k + 1] = next[k + 1].add(&q.mul_phi().scale(-1.0));
        }
        c = next;
    }
    Ok(c)
}

/// `(−φ ∂_i)^r g` at `x`: the operator is expanded exactly and only the
/// derivatives `∂_i^k g` are differenced, on one stencil kept inside the ball.
fn expanded_neg_phi_di(g: &dyn Fn(&[f64]) -> f64, coeffs: &[PhiPoly], i: usize, x: &[f64], h: f64) -> f64 {
    let r = coeffs.len() - 1;
    if r == 0 {
        return g(x);
    }
    let q = stencil_half_width(r);
    let step = h.min(0.95 * chord_margin(x, i) / q as f64);
    let phi = phi_raw(x);
    if !(step > 0.0) {
        return 0.0;
    }
    let offsets: Vec<f64> = (-(q as i64)..=q as i64).map(|k| k as f64 * step).collect();
    let w = fd_weights(0.0, &offsets, r);
    let mut y = x.to_vec();
    let samples: Vec<f64> = offsets
        .iter()
        .map(|t| {
            y[i] = x[i] + t;
            g(&y)
        })
        .collect();
    coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let dk: f64 = w[k].iter().zip(&samples).map(|(a, b)| a * b).sum();
            c.eval_with_phi(x, phi) * dk
        })
        .sum()
}

/// Explicit side `(−φ ∂_i)^r [f(s·)](x)` for any handle, differencing only
/// `f` along `e_i` with step at most `h`.
pub fn d_id1_explicit(f: &FnHandle, r: usize, i: usize, y: &[f64], h: f64) -> Result<f64> {
    let d = f.dim();
    check_dim(d + 1, y.len())?;
    check_did1(d, r, i)?;
    let s = norm(y);
    if s > 1.0 + 1e-12 {
        return Err(Error::usage(format!("point of norm {s} lies outside B^{}", d + 1)));
    }
    if s == 0.0 {
        return Ok(if r == 0 { f.call(&y[..d]) } else { 0.0 });
    }
    let x: Vec<f64> = y[..d].iter().map(|v| v / s).collect();
    let g = |z: &[f64]| {
        let sz: Vec<f64> = z.iter().map(|v| s * v).collect();
        f.call(&sz)
    };
    let sign = if y[d] < 0.0 && r % 2 == 1 { -1.0 } else { 1.0 };
    let coeffs = neg_phi_di_expansion(d, i, r)?;
    Ok(sign * expanded_neg_phi_di(&g, &coeffs, i, &x, h))
}

/// `x ↦ (φ ∂_i)^r [f(s ·)](x)` on `B^d`; exact for polynomials, differences
/// of `f` with step at most `h` otherwise.
pub fn phi_di_pow_handle(f: &FnHandle, r: usize, i: usize, s: f64, h: f64) -> Result<FnHandle> {
    let d = f.dim();
    check_did1(d, r, i)?;
    let sign = if r % 2 == 1 { -1.0 } else { 1.0 };
    let name = format!("(φ∂_{})^{r}[{}]", i + 1, f.name());
    if let Some(p) = f.poly() {
        let q = neg_phi_di_pow(&p.scale_argument(s), i, r)?;
        return Ok(FnHandle::new(Domain::Ball(d), name, move |x| sign * q.eval(x)));
    }
    let g = f.clone();
    let coeffs = neg_phi_di_expansion(d, i, r)?;
    Ok(FnHandle::new(Domain::Ball(d), name, move |x| {
        let inner = |z: &[f64]| {
            let sz: Vec<f64> = z.iter().map(|v| s * v).collect();
            g.call(&sz)
        };
        sign * expanded_neg_phi_di(&inner, &coeffs, i, x, h)
    }))
}

/// `x ↦ φ(x)^r ∂_i^r f(x)`; exact for polynomials, central differences
/// (kept inside the ball) otherwise.
pub fn phi_pow_di_pow_handle(f: &FnHandle, r: usize, i: usize, h: f64) -> Result<FnHandle> {
    let d = f.dim();
    check_did1(d, r, i)?;
    let name = format!("φ^{r}∂_{}^{r}[{}]", i + 1, f.name());
    if let Some(p) = f.poly() {
        let mut q = p.clone();
        for _ in 0..r {
            q = q.partial(i)?;
        }
        return Ok(FnHandle::new(Domain::Ball(d), name, move |x| phi_raw(x).powi(r as i32) * q.eval_unchecked(x)));
    }
    let g = f.clone();
    let half = crate::sphere::default_half_width(r);
    Ok(FnHandle::new(Domain::Ball(d), name, move |x| {
        let phi = phi_raw(x);
        if r == 0 {
            return g.call(x);
        }
        let step = h.min(0.9 * chord_margin(x, i) / half as f64);
        if step <= 0.0 {
            return 0.0;
        }
        let (offsets, w) = crate::sphere::central_stencil(r, half, step);
        let mut y = x.to_vec();
        let mut acc = 0.0;
        for (t, wk) in offsets.iter().zip(&w) {
            y[i] = x[i] + t;
            acc += wk * g.call(&y);
        }
        phi.powi(r as i32) * acc
    }))
}

/// `x ↦ φ(x)^r ∂_i^r g(x)` for a handle `g` known to be a polynomial of
/// degree at most `degree`. The restriction of `g` to the chord through `x`
/// along `e_i` is interpolated at Chebyshev points and differentiated, so no
/// step shrinks near the sphere.
pub fn phi_pow_di_pow_chord(g: &FnHandle, r: usize, i: usize, degree: usize) -> Result<FnHandle> {
    let d = g.dim();
    check_did1(d, r, i)?;
    let n = degree.max(r).max(1);
    let nodes: Vec<f64> = (0..=n).map(|k| (PI * k as f64 / n as f64).cos()).collect();
    let g = g.clone();
    let name = format!("φ^{r}∂_{}^{r}[{}]", i + 1, g.name());
    Ok(FnHandle::new(Domain::Ball(d), name, move |x| {
        let phi = phi_raw(x);
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let c = (1.0 - r2 + x[i] * x[i]).max(0.0).sqrt();
        if r == 0 {
            return g.call(x);
        }
        if phi == 0.0 || c == 0.0 {
            return 0.0;
        }
        let mut y = x.to_vec();
        let vals: Vec<f64> = nodes
            .iter()
            .map(|u| {
                y[i] = c * u;
                g.call(&y)
            })
            .collect();
        let mut a = cheb_coeffs(&vals);
        for _ in 0..r {
            a = cheb_derivative(&a);
        }
        let u = (x[i] / c).clamp(-1.0, 1.0);
        // φ ≤ c, so (φ/c)^r keeps the chord rescaling bounded.
        (phi / c).powi(r as i32) * cheb_eval(&a, u)
    }))
}

/// Chebyshev coefficients of the interpolant through values at `cos(πk/n)`.
fn cheb_coeffs(v: &[f64]) -> Vec<f64> {
    let n = v.len() - 1;
    (0..=n)
        .map(|j| {
            let s: f64 = v
                .iter()
                .enumerate()
                .map(|(k, x)| {
                    let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                    w * x * (PI * (j * k) as f64 / n as f64).cos()
                })
                .sum();
            let e = if j == 0 || j == n { 1.0 } else { 2.0 };
            e * s / n as f64
        })
        .collect()
}

fn cheb_derivative(a: &[f64]) -> Vec<f64> {
    let n = a.len() - 1;
    if n == 0 {
        return vec![0.0];
    }
    // b_k = b_{k+2} + 2(k+1) a_{k+1}, with b_n = b_{n+1} = 0.
    let mut b = vec![0.0; n + 2];
    for k in (0..n).rev() {
        b[k] = b[k + 2] + 2.0 * (k + 1) as f64 * a[k + 1];
    }
    b[0] *= 0.5;
    b.truncate(n);
    b
}

fn cheb_eval(a: &[f64], u: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in a.iter().skip(1).rev() {
        let b0 = 2.0 * u * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    u * b1 - b2 + a[0]
}

/// `Σ_k (−1)^k C(r,k) f(x + (r/2 − k) h φ(x) e_i)`, or `0` when a sample
/// leaves the ball.
pub fn central_diff_phi(f: &FnHandle, r: usize, i: usize, h: f64, x: &[f64]) -> Result<f64> {
    check_dim(f.dim(), x.len())?;
    if i >= x.len() {
        return Err(Error::usage(format!("index {i} out of range for d = {}", x.len())));
    }
    if r == 0 || !(h > 0.0) {
        return Err(Error::usage(format!("need r ≥ 1 and h > 0, got r = {r}, h = {h}")));
    }
    let g = |y: &[f64]| f.call(y);
    Ok(central_diff_phi_raw(&g, r, i, h, x))
}

pub(crate) fn central_diff_phi_raw(f: &dyn Fn(&[f64]) -> f64, r: usize, i: usize, h: f64, x: &[f64]) -> f64 {
    let phi = phi_raw(x);
    if phi == 0.0 {
        return 0.0;
    }
    let rest: f64 = x.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, v)| v * v).sum();
    let half = 0.5 * r as f64 * h * phi;
    for shift in [-half, half] {
        let c = x[i] + shift;
        if (rest + c * c).sqrt() > 1.0 + 1e-12 {
            return 0.0;
        }
    }
    let mut y = x.to_vec();
    let mut acc = 0.0;
    for k in 0..=r {
        y[i] = x[i] + (0.5 * r as f64 - k as f64) * h * phi;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom(r, k) * f(&y);
    }
    acc
}

/// Quadrature over the lifted domain: `S^d` for `m = 1`, `(B^{d+1}, W_0)`
/// for `m = 2`; weights already carry the factor `1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedRule {
    pub domain: Domain,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub exactness: usize,
    /// Present when the lifted domain is `S^2`, enabling spectral routes.
    pub sphere: Option<SphereRule>,
}

impl LiftedRule {
    pub fn new(d: usize, m: usize, degree: usize) -> Result<Self> {
        match m {
            1 => {
                let s = sphere_rule(d + 1, degree)?;
                Ok(LiftedRule {
                    domain: Domain::Sphere(d + 1),
                    points: s.points.clone(),
                    weights: s.weights.iter().map(|w| 0.5 * w).collect(),
                    exactness: degree,
                    sphere: Some(s),
                })
            }
            2 => {
                let b = ball_rule(d + 1, 0.0, degree)?;
                Ok(LiftedRule {
                    domain: Domain::Ball(d + 1),
                    points: b.points,
                    weights: b.weights.iter().map(|w| 0.5 * w).collect(),
                    exactness: degree,
                    sphere: None,
                })
            }
            _ => Err(Error::usage(format!("lift dimension m = {m} unsupported; use m ∈ {{1, 2}}"))),
        }
    }

    pub fn spacing(&self) -> f64 {
        PI / (self.exactness as f64 + 1.0)
    }

    /// Norm of nodal values; `g` evaluates the same function for `p = ∞` refinement.
    pub(crate) fn norm_of(
        &self,
        values: &[f64],
        p: f64,
        g: &(dyn Fn(&[f64]) -> f64 + Sync),
        seeds: &[Vec<f64>],
        opts: &SupOptions,
    ) -> f64 {
        if p.is_infinite() {
            let a: Vec<f64> = values.iter().map(|v| v.abs()).collect();
            let h = |x: &[f64]| g(x).abs();
            refine_sup_seeded(&h, self.domain, &self.points, &a, seeds, self.spacing(), opts)
        } else {
            lp_from_values(values, &self.weights, p)
        }
    }

    pub fn lp_norm(&self, f: &FnHandle, p: f64, opts: &SupOptions) -> Result<f64> {
        check_p(p)?;
        check_dim(self.domain.dim(), f.dim())?;
        let v = values_on(f, &self.points)?;
        Ok(self.norm_of(&v, p, &|x| f.call(x), f.hotspots(), opts))
    }
}

/// Lifted images `(x, ±φ(x))` (and `(x, 0)` inside `B^{d+1}`) of base hotspots.
pub(crate) fn lifted_hotspots(f: &FnHandle, domain: Domain) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for h in f.hotspots() {
        let phi = phi_raw(h);
        let mut lifts = vec![phi, -phi];
        if matches!(domain, Domain::Ball(_)) {
            lifts.push(0.0);
        }
        for c in lifts {
            let mut v = h.clone();
            v.push(c);
            out.push(v);
        }
    }
    out
}

/// A weighted `L^p` value with the quadrature degree used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DidNorm {
    pub value: f64,
    pub resolution: usize,
}

/// Number of radial nodes in `s` for the `m = 2` layer integral.
fn radial_layers(degree: usize) -> usize {
    degree / 4 + 4
}

/// `‖(φ∂_i)^r f‖` assembled on `B^d`: for `m = 1` in `L^p(B^d, W_0)`; for
/// `m = 2` as the layer integral
/// `∫_0^1 s^d (1−s²)^{−1/2} ∫_{B^d} |(φ∂_i)^r[f(s·)]|^p W_0 dx ds`.
pub fn norm_did1(f: &FnHandle, r: usize, i: usize, p: f64, mu: f64, degree: usize) -> Result<DidNorm> {
    check_p(p)?;
    let d = f.dim();
    check_did1(d, r, i)?;
    let m = lift_m(mu)?;
    let rule = ball_rule(d, 0.0, degree)?;
    let h = ROTATION_STEP;
    let opts = SupOptions::default();
    let value = if m == 1 {
        lp_norm_ball_opts(&phi_di_pow_handle(f, r, i, 1.0, h)?, p, &rule, &opts)?
    } else {
        let n = radial_layers(degree);
        // s = (1+t)/2, (1−s²)^{−1/2} = ((1−t)/2)^{−1/2} (1+s)^{−1/2}, ds = dt/2.
        let g = gauss_rule(GaussKind::Jacobi { a: -0.5, b: 0.0 }, n)?;
        let mut acc = 0.0_f64;
        for (&t, &wt) in g.nodes.iter().zip(&g.weights) {
            let s = (1.0 + t) / 2.0;
            let layer = lp_norm_ball_opts(&phi_di_pow_handle(f, r, i, s, h)?, p, &rule, &opts)?;
            if p.is_infinite() {
                acc = acc.max(layer);
            } else {
                let jac = 0.5 * 2f64.sqrt() * s.powi(d as i32) / (1.0 + s).sqrt();
                acc += wt * jac * layer.powf(p);
            }
        }
        if p.is_infinite() {
            acc.max(lp_norm_ball_opts(&phi_di_pow_handle(f, r, i, 1.0, h)?, p, &rule, &opts)?)
        } else {
            acc.powf(1.0 / p)
        }
    };
    Ok(DidNorm { value, resolution: degree })
}

/// The same quantity computed on the lifted domain from `D^r_{i,d+1} f̃`
/// directly (half measure, see the module notes).
pub fn norm_did1_direct(f: &FnHandle, r: usize, i: usize, p: f64, mu: f64, degree: usize) -> Result<DidNorm> {
    check_p(p)?;
    let d = f.dim();
    let m = lift_m(mu)?;
    let lifted = LiftedRule::new(d, m, degree)?;
    let g = d_id1_direct_handle(f, r, i, lifted.domain)?;
    let value = lifted.lp_norm(&g, p, &SupOptions::default())?;
    Ok(DidNorm { value, resolution: degree })
}

//! Approximation on `B^d` with the weight `W_μ`, `μ = (m−1)/2`, `m ∈ {1, 2}`:
//! the reproducing kernels `P_k^μ`, the near-best operator `V_n^μ`, weighted
//! best `L²` errors, the two ball moduli, the two K-functionals and the
//! Sobolev and Lipschitz-type norms.
//!
//! `P_k^μ(x, y)` is the average over `ξ ∈ S^{m−1}` of `Z_{k,d+m}(⟨x, y⟩ +
//! φ(x) φ(y) ξ_1)`, so that `P_0 = 1`. For `d = 2, μ = 0` every quantity is
//! computed through the lift `F(x, x_3) = f(x)` on `S^2`: projections, moduli
//! and K-functionals of `f` equal those of `F` measured with half the surface
//! measure. On `B^1` the operator `V_m^μ f` is a Gegenbauer series with
//! parameter `μ`, which gives exact derivatives.
//!
//! Ball best errors are distances to `Π_n` (degree `≤ n`).

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::ball::{
    ball_rule, d_id1_tilde_handle, lift_m, lp_norm_ball_opts, neg_phi_di_expansion, phi_pow_di_pow_chord, phi_pow_di_pow_handle, phi_raw,
    central_diff_phi_raw, BallRule, ExtendedFn, LiftedRule,
};
use crate::error::{check_dim, Error, Result};
use crate::func::{Domain, FnHandle};
use crate::ortho::{zonal_all, zonal_raw, zonal_series, zonal_series_derivative, CutoffEta};
use crate::spectral::S2Spectrum;
use crate::sphere::{
    check_p, check_plane, dot, forward_diff_raw, lp_from_values, norm, refine_sup_seeded, values_on, SphereRule,
    SupOptions,
};
use crate::sphere_approx::{
    check_lip, dij_handle, kfunc_sphere_candidates, lipschitz_norm_sphere, lipschitz_norm_sphere_dyadic,
    modulus_profile_opts, nested_grid_sups, prefix_sups, zonal_multiplier, tail_error, HarmonicExpansion, ThetaGrid, ZonalSpec, DEFAULT_DERIVATIVE_STEP,
};

/// Parameters of `V_n^μ` on `B^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallKernelSpec {
    n: usize,
    d: usize,
    mu: f64,
    m: usize,
    zonal: ZonalSpec,
}

impl BallKernelSpec {
    pub fn new(n: usize, d: usize, mu: f64) -> Result<Self> {
        Self::with_eta(n, d, mu, CutoffEta::default())
    }

    pub fn with_eta(n: usize, d: usize, mu: f64, eta: CutoffEta) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::usage(format!("ball kernels support d ∈ {{1, 2, 3}}, got {d}")));
        }
        let m = lift_m(mu)?;
        Ok(BallKernelSpec { n, d, mu, m, zonal: ZonalSpec::with_eta(n, d + m, eta)? })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn eta(&self) -> &CutoffEta {
        self.zonal.eta()
    }

    /// Multipliers `η(k/n)`, trailing zeros removed.
    pub fn coefficients(&self) -> Vec<f64> {
        self.zonal.coefficients()
    }

    /// `K_n^μ(x, y) = Σ_k η(k/n) P_k^μ(x, y)`.
    pub fn kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let a = self.coefficients();
        let lift = LiftKernel::new(self.d, self.m, a.len() - 1);
        let (u, c) = kernel_args(self.d, x, y)?;
        Ok(lift.series(&a, u, c))
    }
}

/// Averaging over `S^{m−1}`: the two points `±1` for `m = 1`, Gauss–Chebyshev
/// nodes `cos θ_j` for `m = 2` (exact for the degrees in use).
#[derive(Debug, Clone)]
struct LiftKernel {
    lambda: f64,
    nodes: Vec<f64>,
}

impl LiftKernel {
    fn new(d: usize, m: usize, kmax: usize) -> Self {
        let nodes = if m == 1 {
            vec![1.0, -1.0]
        } else {
            let k = kmax / 2 + 1;
            (0..k).map(|j| (PI * (j as f64 + 0.5) / k as f64).cos()).collect()
        };
        LiftKernel { lambda: (d + m) as f64 / 2.0 - 1.0, nodes }
    }

    /// `out[k] = P_k(x, y)` from `u = ⟨x, y⟩` and `c = φ(x) φ(y)`.
    fn fill(&self, u: f64, c: f64, out: &mut [f64], scratch: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let w = 1.0 / self.nodes.len() as f64;
        for &t in &self.nodes {
            zonal_all(self.lambda, (u + c * t).clamp(-1.0, 1.0), scratch);
            for (o, s) in out.iter_mut().zip(scratch.iter()) {
                *o += w * s;
            }
        }
    }

    fn series(&self, a: &[f64], u: f64, c: f64) -> f64 {
        let w = 1.0 / self.nodes.len() as f64;
        self.nodes.iter().map(|&t| w * zonal_series(a, self.lambda, (u + c * t).clamp(-1.0, 1.0))).sum()
    }
}

fn kernel_args(d: usize, x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    check_dim(d, x.len())?;
    check_dim(d, y.len())?;
    for z in [x, y] {
        let n = norm(z);
        if n > 1.0 + 1e-12 {
            return Err(Error::usage(format!("point of norm {n} lies outside B^{d}")));
        }
    }
    Ok((dot(x, y), phi_raw(x) * phi_raw(y)))
}

/// `P_n^μ(x, y)`.
pub fn pnmu_kernel(spec: &BallKernelSpec, n: usize, x: &[f64], y: &[f64]) -> Result<f64> {
    let (u, c) = kernel_args(spec.d, x, y)?;
    let lift = LiftKernel::new(spec.d, spec.m, n);
    let mut out = vec![0.0; n + 1];
    let mut scratch = vec![0.0; n + 1];
    lift.fill(u, c, &mut out, &mut scratch);
    Ok(out[n])
}

fn check_rule(spec: &BallKernelSpec, rule: &BallRule) -> Result<()> {
    check_dim(spec.d, rule.dim)?;
    if rule.mu != spec.mu {
        return Err(Error::usage(format!("rule weight μ = {} differs from kernel μ = {}", rule.mu, spec.mu)));
    }
    Ok(())
}

struct BallKernelData {
    points: Vec<Vec<f64>>,
    phis: Vec<f64>,
    fw: Vec<f64>,
    coeffs: Vec<f64>,
    lift: LiftKernel,
}

impl BallKernelData {
    fn eval(&self, x: &[f64]) -> f64 {
        let px = phi_raw(x);
        self.points
            .iter()
            .zip(&self.phis)
            .zip(&self.fw)
            .map(|((y, py), w)| w * self.lift.series(&self.coeffs, dot(x, y), px * py))
            .sum()
    }
}

/// `V_n^μ f(x) = a_μ ∫ f(y) K_n^μ(x, y) W_μ(y) dy` by the rule.
pub fn vnmu_apply(f: &FnHandle, spec: &BallKernelSpec, rule: &BallRule) -> Result<FnHandle> {
    check_rule(spec, rule)?;
    check_dim(rule.dim, f.dim())?;
    let a = spec.coefficients();
    let v = values_on(f, &rule.points)?;
    let data = Arc::new(BallKernelData {
        points: rule.points.clone(),
        phis: rule.points.iter().map(|y| phi_raw(y)).collect(),
        fw: v.iter().zip(&rule.weights).map(|(v, w)| v * w / rule.total_mass).collect(),
        lift: LiftKernel::new(spec.d, spec.m, a.len() - 1),
        coeffs: a,
    });
    let name = format!("V_{}^μ[{}]", spec.n, f.name());
    Ok(FnHandle::new(Domain::Ball(spec.d), name, move |x| data.eval(x)))
}

/// Base rule with `W_μ` and the matching lifted rule.
#[derive(Debug, Clone, PartialEq)]
pub struct BallRules {
    pub base: BallRule,
    pub lifted: LiftedRule,
    pub mu: f64,
    pub m: usize,
}

impl BallRules {
    pub fn new(d: usize, mu: f64, degree: usize) -> Result<Self> {
        let m = lift_m(mu)?;
        Ok(BallRules { base: ball_rule(d, mu, degree)?, lifted: LiftedRule::new(d, m, degree)?, mu, m })
    }

    pub fn d(&self) -> usize {
        self.base.dim
    }

    pub fn exactness(&self) -> usize {
        self.base.exactness
    }

    /// The `S^2` rule when `d = 2, μ = 0` and it supports spectra up to `lmax`.
    fn lift_sphere(&self, lmax: usize) -> Option<&SphereRule> {
        match &self.lifted.sphere {
            Some(s) if self.d() == 2 && self.m == 1 && S2Spectrum::supports(s, lmax) => Some(s),
            _ => None,
        }
    }
}

/// `F(x, x_{d+1}) = f(x)` on `S^d`.
fn sphere_lift(f: &FnHandle) -> Result<FnHandle> {
    Ok(ExtendedFn::on_sphere(f)?.handle().clone())
}

/// `2^{−1/p}`: converts full-sphere norms of lifts to ball norms.
fn half_measure(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else {
        0.5f64.powf(1.0 / p)
    }
}

enum ExpansionData {
    Lift(HarmonicExpansion),
    Nodal { values: Vec<f64>, weights: Vec<f64>, comps: Vec<Vec<f64>> },
}

/// Weighted projections `proj_k f = a_μ ∫ f(y) P_k^μ(·, y) W_μ(y) dy`, `k ≤ N`.
pub struct BallExpansion {
    max_degree: usize,
    degree_norms_sq: Vec<f64>,
    total_norm_sq: f64,
    data: ExpansionData,
}

impl std::fmt::Debug for BallExpansion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BallExpansion")
            .field("max_degree", &self.max_degree)
            .field("degree_norms_sq", &self.degree_norms_sq)
            .field("total_norm_sq", &self.total_norm_sq)
            .finish()
    }
}

impl BallExpansion {
    /// Uses the `S^2` lift when available, nodal kernels otherwise.
    pub fn new(f: &FnHandle, max_degree: usize, rules: &BallRules) -> Result<Self> {
        check_dim(rules.d(), f.dim())?;
        if let Some(s) = rules.lift_sphere(max_degree) {
            let h = HarmonicExpansion::new(&sphere_lift(f)?, max_degree, s)?;
            return Ok(BallExpansion {
                max_degree,
                degree_norms_sq: h.degree_norms_sq().iter().map(|v| 0.5 * v).collect(),
                total_norm_sq: 0.5 * h.total_norm_sq(),
                data: ExpansionData::Lift(h),
            });
        }
        Self::nodal(f, max_degree, &rules.base)
    }

    pub fn nodal(f: &FnHandle, max_degree: usize, rule: &BallRule) -> Result<Self> {
        check_dim(rule.dim, f.dim())?;
        let m = lift_m(rule.mu)?;
        let values = values_on(f, &rule.points)?;
        let fw: Vec<f64> = values.iter().zip(&rule.weights).map(|(v, w)| v * w / rule.total_mass).collect();
        let phis: Vec<f64> = rule.points.iter().map(|y| phi_raw(y)).collect();
        let lift = LiftKernel::new(rule.dim, m, max_degree);
        let per_node: Vec<Vec<f64>> = rule
            .points
            .par_iter()
            .map(|x| {
                let px = phi_raw(x);
                let mut pk = vec![0.0; max_degree + 1];
                let mut scratch = vec![0.0; max_degree + 1];
                let mut acc = vec![0.0; max_degree + 1];
                for ((y, py), w) in rule.points.iter().zip(&phis).zip(&fw) {
                    lift.fill(dot(x, y), px * py, &mut pk, &mut scratch);
                    for (a, p) in acc.iter_mut().zip(&pk) {
                        *a += w * p;
                    }
                }
                acc
            })
            .collect();
        let comps: Vec<Vec<f64>> = (0..=max_degree).map(|k| per_node.iter().map(|row| row[k]).collect()).collect();
        let sq = |v: &[f64]| rule.integrate_values(&v.iter().map(|x| x * x).collect::<Vec<_>>());
        let degree_norms_sq = comps.iter().map(|c| sq(c)).collect();
        let total_norm_sq = sq(&values);
        Ok(BallExpansion {
            max_degree,
            degree_norms_sq,
            total_norm_sq,
            data: ExpansionData::Nodal { values, weights: rule.weights.clone(), comps },
        })
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn degree_norms_sq(&self) -> &[f64] {
        &self.degree_norms_sq
    }

    pub fn total_norm_sq(&self) -> f64 {
        self.total_norm_sq
    }

    pub fn parseval_sum(&self) -> f64 {
        self.degree_norms_sq.iter().sum()
    }

    pub fn tail_defect(&self) -> f64 {
        self.total_norm_sq - self.parseval_sum()
    }

    /// `‖f − Σ_k a_k proj_k f‖_{2,μ}`, `a_k = 0` past the end of `a`.
    pub fn filtered_residual(&self, a: &[f64]) -> Result<f64> {
        if a.len() > self.max_degree + 1 {
            return Err(Error::usage(format!(
                "multipliers reach degree {} beyond expansion degree {}",
                a.len() - 1,
                self.max_degree
            )));
        }
        match &self.data {
            ExpansionData::Lift(h) => {
                let dn = h.degree_norms_sq();
                let kept: f64 = dn.iter().enumerate().map(|(k, v)| (1.0 - a.get(k).copied().unwrap_or(0.0)).powi(2) * v).sum();
                let beyond = tail_error(dn, h.total_norm_sq(), dn.len())?;
                Ok((0.5 * (kept + beyond)).sqrt())
            }
            ExpansionData::Nodal { values, weights, comps } => {
                let r: Vec<f64> = values
                    .iter()
                    .enumerate()
                    .map(|(x, v)| v - a.iter().zip(comps).map(|(ak, c)| ak * c[x]).sum::<f64>())
                    .collect();
                Ok(lp_from_values(&r, weights, 2.0))
            }
        }
    }

    /// `E_n(f)_{2,μ} = inf_{g ∈ Π_n} ‖f − g‖_{2,μ}`.
    pub fn best_l2_error(&self, n: usize) -> Result<f64> {
        if n > self.max_degree {
            return Err(Error::usage(format!("E_{n} needs components up to degree {n}")));
        }
        match &self.data {
            ExpansionData::Lift(h) => Ok(h.best_l2_error(n + 1)? / 2f64.sqrt()),
            ExpansionData::Nodal { .. } => self.filtered_residual(&vec![1.0; n + 1]),
        }
    }
}

/// `E_n(f)_{2,μ}` from an expansion to degree `max(n, n_max)`.
pub fn best_l2_error_ball(f: &FnHandle, n: usize, rules: &BallRules, n_max: usize) -> Result<f64> {
    BallExpansion::new(f, n_max.max(n), rules)?.best_l2_error(n)
}

/// Node set of a rule on `B^d`, `B^{d+1}` or `S^d`.
#[derive(Clone, Copy)]
struct Nodes<'a> {
    domain: Domain,
    points: &'a [Vec<f64>],
    weights: &'a [f64],
    spacing: f64,
}

impl<'a> Nodes<'a> {
    fn base(rule: &'a BallRule) -> Self {
        Nodes { domain: rule.domain(), points: &rule.points, weights: &rule.weights, spacing: rule.spacing() }
    }

    fn lifted(rule: &'a LiftedRule) -> Self {
        Nodes { domain: rule.domain, points: &rule.points, weights: &rule.weights, spacing: rule.spacing() }
    }

    fn norm(&self, g: &(dyn Fn(&[f64]) -> f64 + Sync), p: f64, seeds: &[Vec<f64>], opts: &SupOptions) -> Result<f64> {
        let v: Vec<f64> = self.points.par_iter().map(|x| g(x)).collect();
        if let Some(k) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::Evaluation { node: k, value: v[k] });
        }
        if p.is_infinite() {
            let a: Vec<f64> = v.iter().map(|x| x.abs()).collect();
            let h = |x: &[f64]| g(x).abs();
            return Ok(refine_sup_seeded(&h, self.domain, self.points, &a, seeds, self.spacing, opts));
        }
        Ok(lp_from_values(&v, self.weights, p))
    }
}

fn rotation_seeds(hotspots: &[Vec<f64>], r: usize, i: usize, j: usize, theta: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for h in hotspots {
        for k in 0..=r {
            let mut y = h.clone();
            crate::sphere::rotate_plane(&mut y, i, j, -(k as f64) * theta);
            out.push(y);
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn difference_norms(
    g: &(dyn Fn(&[f64]) -> f64 + Sync),
    hotspots: &[Vec<f64>],
    r: usize,
    i: usize,
    j: usize,
    thetas: &[f64],
    p: f64,
    nodes: Nodes<'_>,
    opts: &SupOptions,
) -> Result<Vec<f64>> {
    thetas
        .iter()
        .map(|&th| {
            let h = |x: &[f64]| forward_diff_raw(g, r, i, j, th, x);
            nodes.norm(&h, p, &rotation_seeds(hotspots, r, i, j, th), opts)
        })
        .collect()
}

fn planes(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect()
}

fn check_ts(ts: &[f64]) -> Result<()> {
    match ts.iter().find(|t| !(**t > 0.0 && **t <= PI)) {
        Some(t) => Err(Error::usage(format!("modulus step t = {t} outside (0, π]"))),
        None => Ok(()),
    }
}

/// Per-`t` maxima of a flat list of per-angle values, then a running max in `t`.
fn profile_from_flat(ts: &[f64], sizes: &[usize], flat: &[f64]) -> Vec<f64> {
    let mut per_t = Vec::with_capacity(ts.len());
    let mut offset = 0;
    for &n in sizes {
        per_t.push(flat[offset..offset + n].iter().cloned().fold(0.0, f64::max));
        offset += n;
    }
    let mut order: Vec<usize> = (0..ts.len()).collect();
    order.sort_by(|&a, &b| ts[a].total_cmp(&ts[b]));
    let mut out = vec![0.0; ts.len()];
    let mut running = 0.0_f64;
    for k in order {
        running = running.max(per_t[k]);
        out[k] = running;
    }
    out
}

/// `ω_r(f, t)_{p,μ}`: rotation differences in the planes of `B^d` measured with
/// `W_μ`, and in the `(i, d+1)` planes acting on `f̃` over the lifted domain.
pub fn modulus_ball(f: &FnHandle, r: usize, t: f64, p: f64, rules: &BallRules, grid: &ThetaGrid) -> Result<f64> {
    Ok(modulus_ball_profile(f, r, &[t], p, rules, grid)?[0])
}

/// Moduli at several `t`, nondecreasing in `t`.
pub fn modulus_ball_profile(
    f: &FnHandle,
    r: usize,
    ts: &[f64],
    p: f64,
    rules: &BallRules,
    grid: &ThetaGrid,
) -> Result<Vec<f64>> {
    check_p(p)?;
    check_dim(rules.d(), f.dim())?;
    check_ts(ts)?;
    if r == 0 {
        return Err(Error::usage("difference order must be ≥ 1"));
    }
    let opts = SupOptions::default();
    if let Some(s) = rules.lift_sphere(0) {
        let w = modulus_profile_opts(&sphere_lift(f)?, r, ts, p, s, grid, &opts)?;
        let c = half_measure(p);
        return Ok(w.into_iter().map(|v| c * v).collect());
    }
    let d = rules.d();
    let thetas: Vec<Vec<f64>> = ts.iter().map(|&t| grid.angles(t)).collect();
    let sizes: Vec<usize> = thetas.iter().map(|v| v.len()).collect();
    let flat: Vec<f64> = thetas.iter().flatten().copied().collect();
    let mut best = vec![0.0_f64; flat.len()];
    let mut merge = |norms: Vec<f64>| {
        for (b, v) in best.iter_mut().zip(norms) {
            *b = b.max(v);
        }
    };
    let g = |x: &[f64]| f.call(x);
    for (i, j) in planes(d) {
        merge(difference_norms(&g, f.hotspots(), r, i, j, &flat, p, Nodes::base(&rules.base), &opts)?);
    }
    let ext = match rules.lifted.domain {
        Domain::Sphere(_) => ExtendedFn::on_sphere(f)?,
        Domain::Ball(_) => ExtendedFn::new(f)?,
    };
    let ge = |y: &[f64]| ext.handle().call(y);
    for i in 0..d {
        merge(difference_norms(&ge, ext.handle().hotspots(), r, i, d, &flat, p, Nodes::lifted(&rules.lifted), &opts)?);
    }
    Ok(profile_from_flat(ts, &sizes, &best))
}

/// Unweighted `ω̂_r(f, t)_p`: rotation differences in the planes of `B^d` and
/// the φ-scaled central differences `Δ̂^r_{hφe_i}`, `0 < h ≤ t`. The rule
/// should carry `μ = 1/2`.
pub fn hat_modulus_ball(f: &FnHandle, r: usize, t: f64, p: f64, rule: &BallRule, grid: &ThetaGrid) -> Result<f64> {
    Ok(hat_modulus_ball_profile(f, r, &[t], p, rule, grid)?[0])
}

pub fn hat_modulus_ball_profile(
    f: &FnHandle,
    r: usize,
    ts: &[f64],
    p: f64,
    rule: &BallRule,
    grid: &ThetaGrid,
) -> Result<Vec<f64>> {
    check_p(p)?;
    check_dim(rule.dim, f.dim())?;
    check_ts(ts)?;
    if r == 0 {
        return Err(Error::usage("difference order must be ≥ 1"));
    }
    let opts = SupOptions::default();
    let thetas: Vec<Vec<f64>> = ts.iter().map(|&t| grid.angles(t)).collect();
    let sizes: Vec<usize> = thetas.iter().map(|v| v.len()).collect();
    let flat: Vec<f64> = thetas.iter().flatten().copied().collect();
    let mut best = vec![0.0_f64; flat.len()];
    let nodes = Nodes::base(rule);
    let g = |x: &[f64]| f.call(x);
    for (i, j) in planes(rule.dim) {
        for (b, v) in best.iter_mut().zip(difference_norms(&g, f.hotspots(), r, i, j, &flat, p, nodes, &opts)?) {
            *b = b.max(v);
        }
    }
    for i in 0..rule.dim {
        for (b, &h) in best.iter_mut().zip(&flat) {
            let c = |x: &[f64]| central_diff_phi_raw(&g, r, i, h, x);
            *b = b.max(nodes.norm(&c, p, f.hotspots(), &opts)?);
        }
    }
    Ok(profile_from_flat(ts, &sizes, &best))
}

/// One candidate `g = V_m^μ f` of the ball K-functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallKCandidate {
    pub degree: usize,
    /// `‖f − g‖_{p,μ}`.
    pub distance: f64,
    /// Max of `‖D^r_{i,j} g‖_{p,μ}` and of the lifted `‖D^r_{i,d+1} g̃‖`.
    pub derivative: f64,
    /// `max_i ‖φ^r ∂_i^r g‖_{p,μ}`.
    pub hat_derivative: f64,
}

impl BallKCandidate {
    pub fn value(&self, r: usize, t: f64) -> f64 {
        self.distance + t.powi(r as i32) * self.derivative
    }

    pub fn hat_value(&self, r: usize, t: f64) -> f64 {
        self.distance + t.powi(r as i32) * self.hat_derivative
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallKValue {
    pub value: f64,
    pub degree: usize,
}

/// `V_m^μ f` on `B^1` as `Σ_k b_k Z_k^{(μ)}`, with exact derivatives.
struct Series1D {
    b: Vec<f64>,
    lambda: f64,
}

impl Series1D {
    fn new(f: &FnHandle, a: &[f64], rule: &BallRule) -> Result<Self> {
        let lambda = rule.mu;
        let v = values_on(f, &rule.points)?;
        let kmax = a.len() - 1;
        let mut b = vec![0.0; kmax + 1];
        let mut z = vec![0.0; kmax + 1];
        for ((y, fy), w) in rule.points.iter().zip(&v).zip(&rule.weights) {
            zonal_all(lambda, y[0].clamp(-1.0, 1.0), &mut z);
            for (bk, zk) in b.iter_mut().zip(&z) {
                *bk += fy * w * zk;
            }
        }
        for (k, bk) in b.iter_mut().enumerate() {
            *bk *= a[k] / (rule.total_mass * zonal_raw(k, lambda, 1.0));
        }
        Ok(Series1D { b, lambda })
    }

    fn deriv(&self, k: usize, x: f64) -> f64 {
        zonal_series_derivative(&self.b, self.lambda, k, x.clamp(-1.0, 1.0))
    }
}

/// Candidates `V_m^μ f`, `m ∈ degrees`, with both derivative brackets.
pub fn kfunc_ball_candidates(
    f: &FnHandle,
    r: usize,
    p: f64,
    rules: &BallRules,
    degrees: &[usize],
) -> Result<Vec<BallKCandidate>> {
    ball_candidates(f, r, p, rules, degrees, true)
}

/// [`kfunc_ball_candidates`] without the `φ^r ∂_i^r` bracket, which is left
/// at `+∞`; enough for `K_r` alone.
pub fn kfunc_ball_candidates_plain(
    f: &FnHandle,
    r: usize,
    p: f64,
    rules: &BallRules,
    degrees: &[usize],
) -> Result<Vec<BallKCandidate>> {
    ball_candidates(f, r, p, rules, degrees, false)
}

fn ball_candidates(
    f: &FnHandle,
    r: usize,
    p: f64,
    rules: &BallRules,
    degrees: &[usize],
    with_hat: bool,
) -> Result<Vec<BallKCandidate>> {
    check_p(p)?;
    check_dim(rules.d(), f.dim())?;
    if degrees.is_empty() {
        return Err(Error::usage("K-functional needs at least one candidate degree"));
    }
    if r == 0 || r > 4 {
        return Err(Error::usage(format!("derivative order {r} outside 1..=4")));
    }
    let d = rules.d();
    let opts = SupOptions::default();
    let base = Nodes::base(&rules.base);
    let lifted = Nodes::lifted(&rules.lifted);
    let seeds = f.hotspots();
    degrees
        .iter()
        .map(|&m| {
            let spec = BallKernelSpec::new(m, d, rules.mu)?;
            let a = spec.coefficients();
            if d == 1 {
                let s = Series1D::new(f, &a, &rules.base)?;
                let dist = |x: &[f64]| f.call(x) - s.deriv(0, x[0]);
                let distance = base.norm(&dist, p, seeds, &opts)?;
                let hat = |x: &[f64]| phi_raw(x).powi(r as i32) * s.deriv(r, x[0]);
                let hat_derivative = base.norm(&hat, p, seeds, &opts)?;
                let coeffs = neg_phi_di_expansion(1, 0, r)?;
                let ext = |y: &[f64]| {
                    let sn = norm(y).min(1.0);
                    if sn == 0.0 {
                        return 0.0;
                    }
                    let x = [y[0] / sn];
                    let phi = y[1].abs() / sn;
                    let sign = if y[1] < 0.0 && r % 2 == 1 { -1.0 } else { 1.0 };
                    let v: f64 = coeffs
                        .iter()
                        .enumerate()
                        .map(|(k, c)| c.eval_with_phi(&x, phi) * sn.powi(k as i32) * s.deriv(k, y[0]))
                        .sum();
                    sign * v
                };
                let derivative = lifted.norm(&ext, p, &[], &opts)?;
                return Ok(BallKCandidate { degree: m, distance, derivative, hat_derivative });
            }
            let (distance, derivative, g) = if let Some(sph) = rules.lift_sphere(a.len() - 1) {
                let lf = sphere_lift(f)?;
                let c = kfunc_sphere_candidates(&lf, r, p, sph, &[m])?[0];
                let big = zonal_multiplier(&lf, &a, sph, Default::default())?;
                let g = FnHandle::new(Domain::Ball(d), "V", move |x| {
                    let mut y = x.to_vec();
                    y.push(phi_raw(x));
                    big.call(&y)
                });
                (c.distance * half_measure(p), c.derivative * half_measure(p), g)
            } else {
                let g = vnmu_apply(f, &spec, &rules.base)?;
                let dist = |x: &[f64]| f.call(x) - g.call(x);
                let distance = base.norm(&dist, p, seeds, &opts)?;
                let mut derivative = 0.0_f64;
                for (i, j) in planes(d) {
                    let h = dij_handle(&g, r, i, j, DEFAULT_DERIVATIVE_STEP)?;
                    derivative = derivative.max(base.norm(&|x| h.call(x), p, &[], &opts)?);
                }
                for i in 0..d {
                    let h = d_id1_tilde_handle(&g, r, i, rules.lifted.domain)?;
                    derivative = derivative.max(lifted.norm(&|y| h.call(y), p, &[], &opts)?);
                }
                (distance, derivative, g)
            };
            if !with_hat {
                return Ok(BallKCandidate { degree: m, distance, derivative, hat_derivative: f64::INFINITY });
            }
            let mut hat_derivative = 0.0_f64;
            for i in 0..d {
                let h = phi_pow_di_pow_chord(&g, r, i, a.len() - 1)?;
                hat_derivative = hat_derivative.max(base.norm(&|x| h.call(x), p, &[], &opts)?);
            }
            Ok(BallKCandidate { degree: m, distance, derivative, hat_derivative })
        })
        .collect()
}

fn argmin_by(cands: &[BallKCandidate], v: impl Fn(&BallKCandidate) -> f64) -> Result<BallKValue> {
    cands
        .iter()
        .map(|c| BallKValue { value: v(c), degree: c.degree })
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .ok_or_else(|| Error::usage("no K-functional candidates"))
}

/// Upper bound of `K_r(f, t)_{p,μ}` from precomputed candidates.
pub fn kfunc_ball_from_candidates(cands: &[BallKCandidate], r: usize, t: f64) -> Result<BallKValue> {
    argmin_by(cands, |c| c.value(r, t))
}

/// Upper bound of `K̂_r(f, t)_{p,μ}` from precomputed candidates.
pub fn hat_kfunc_ball_from_candidates(cands: &[BallKCandidate], r: usize, t: f64) -> Result<BallKValue> {
    argmin_by(cands, |c| c.hat_value(r, t))
}

pub fn kfunc_ball_upper(
    f: &FnHandle,
    r: usize,
    t: f64,
    p: f64,
    rules: &BallRules,
    degrees: &[usize],
) -> Result<BallKValue> {
    kfunc_ball_from_candidates(&kfunc_ball_candidates(f, r, p, rules, degrees)?, r, t)
}

pub fn hat_kfunc_ball_upper(
    f: &FnHandle,
    r: usize,
    t: f64,
    p: f64,
    rules: &BallRules,
    degrees: &[usize],
) -> Result<BallKValue> {
    hat_kfunc_ball_from_candidates(&kfunc_ball_candidates(f, r, p, rules, degrees)?, r, t)
}

/// `‖f‖_{p,μ} + Σ_{i<j} ‖D^r_{i,j} f‖_{p,μ} + Σ_i ‖φ^r ∂_i^r f‖_{p,μ}`.
pub fn sobolev_norm_ball(f: &FnHandle, r: usize, p: f64, rule: &BallRule) -> Result<f64> {
    let opts = SupOptions::default();
    let mut acc = lp_norm_ball_opts(f, p, rule, &opts)?;
    if r == 0 {
        return Ok(acc);
    }
    for (i, j) in planes(rule.dim) {
        acc += lp_norm_ball_opts(&dij_handle(f, r, i, j, DEFAULT_DERIVATIVE_STEP)?, p, rule, &opts)?;
    }
    for i in 0..rule.dim {
        acc += lp_norm_ball_opts(&phi_pow_di_pow_handle(f, r, i, 1e-2)?, p, rule, &opts)?;
    }
    Ok(acc)
}

/// `‖f‖_{p,μ}` plus the largest θ^{−α}-scaled `ℓ`-th rotation difference of
/// `D^r_{i,j} f` (planes of `B^d`) and of `D^r_{i,d+1} f̃` (lifted), `0 < θ ≤ 1`.
pub fn lipschitz_norm_ball(
    f: &FnHandle,
    r: usize,
    alpha: f64,
    ell: usize,
    p: f64,
    rules: &BallRules,
    grid: &ThetaGrid,
) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) || ell == 0 {
        return Err(Error::usage(format!("need 0 ≤ α < 1 and ℓ ≥ 1, got α = {alpha}, ℓ = {ell}")));
    }
    check_p(p)?;
    check_dim(rules.d(), f.dim())?;
    if let Some(s) = rules.lift_sphere(0) {
        return Ok(half_measure(p) * lipschitz_norm_sphere(&sphere_lift(f)?, r, alpha, ell, p, s, grid)?);
    }
    let d = rules.d();
    let opts = SupOptions::default();
    let base = lp_norm_ball_opts(f, p, &rules.base, &opts)?;
    let thetas = grid.angles(1.0);
    let mut sup = 0.0_f64;
    let mut fold = |norms: Vec<f64>| {
        for (n, th) in norms.iter().zip(&thetas) {
            sup = sup.max(n / th.powf(alpha));
        }
    };
    for (i, j) in planes(d) {
        let g = dij_handle(f, r, i, j, DEFAULT_DERIVATIVE_STEP)?;
        fold(difference_norms(&|x| g.call(x), &[], ell, i, j, &thetas, p, Nodes::base(&rules.base), &opts)?);
    }
    for i in 0..d {
        let g = if r == 0 {
            ExtendedFn::new(f)?.handle().clone()
        } else {
            d_id1_tilde_handle(f, r, i, rules.lifted.domain)?
        };
        fold(difference_norms(&|y| g.call(y), &[], ell, i, d, &thetas, p, Nodes::lifted(&rules.lifted), &opts)?);
    }
    Ok(base + sup)
}

/// `‖f‖_{p,μ} + max_{0≤k≤K} ω_{r+ℓ}(f, 2^{−k})_{p,μ} / 2^{−k(r+α)}`.
pub fn hnorm_ball(
    f: &FnHandle,
    r: usize,
    alpha: f64,
    ell: usize,
    p: f64,
    rules: &BallRules,
    dyadic_k: usize,
) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) || ell == 0 {
        return Err(Error::usage(format!("need 0 ≤ α < 1 and ℓ ≥ 1, got α = {alpha}, ℓ = {ell}")));
    }
    Ok(*hnorm_ball_dyadic(f, r, alpha, ell, p, rules, dyadic_k)?.last().expect("k = 0 is always present"))
}

/// [`lipschitz_norm_ball`] on the nested grids `θ = m/2^k`, one value per `k`
/// in `ks`.
pub fn lipschitz_norm_ball_dyadic(
    f: &FnHandle,
    r: usize,
    alpha: f64,
    ell: usize,
    p: f64,
    rules: &BallRules,
    ks: &[usize],
) -> Result<Vec<f64>> {
    check_lip(alpha, ell, ks)?;
    check_p(p)?;
    check_dim(rules.d(), f.dim())?;
    if let Some(s) = rules.lift_sphere(0) {
        let v = lipschitz_norm_sphere_dyadic(&sphere_lift(f)?, r, alpha, ell, p, s, ks)?;
        return Ok(v.into_iter().map(|x| half_measure(p) * x).collect());
    }
    let d = rules.d();
    let opts = SupOptions::default();
    let base = lp_norm_ball_opts(f, p, &rules.base, &opts)?;
    let kmax = ks.iter().copied().max().unwrap_or(0);
    let thetas = ThetaGrid { steps: 1 << kmax }.angles(1.0);
    let mut scaled = vec![0.0_f64; thetas.len()];
    let mut fold = |norms: Vec<f64>| {
        for ((s, n), th) in scaled.iter_mut().zip(&norms).zip(&thetas) {
            *s = s.max(n / th.powf(alpha));
        }
    };
    for (i, j) in planes(d) {
        let g = dij_handle(f, r, i, j, DEFAULT_DERIVATIVE_STEP)?;
        fold(difference_norms(&|x| g.call(x), &[], ell, i, j, &thetas, p, Nodes::base(&rules.base), &opts)?);
    }
    for i in 0..d {
        let g = if r == 0 {
            ExtendedFn::new(f)?.handle().clone()
        } else {
            d_id1_tilde_handle(f, r, i, rules.lifted.domain)?
        };
        fold(difference_norms(&|y| g.call(y), &[], ell, i, d, &thetas, p, Nodes::lifted(&rules.lifted), &opts)?);
    }
    Ok(nested_grid_sups(&scaled, kmax, ks).into_iter().map(|s| base + s).collect())
}

/// [`hnorm_ball`] for every `K = 0..=kmax` from a single modulus profile.
pub fn hnorm_ball_dyadic(
    f: &FnHandle,
    r: usize,
    alpha: f64,
    ell: usize,
    p: f64,
    rules: &BallRules,
    kmax: usize,
) -> Result<Vec<f64>> {
    check_lip(alpha, ell, &[kmax])?;
    let base = lp_norm_ball_opts(f, p, &rules.base, &SupOptions::default())?;
    let ts: Vec<f64> = (0..=kmax).map(|k| 0.5_f64.powi(k as i32)).collect();
    let w = modulus_ball_profile(f, r + ell, &ts, p, rules, &ThetaGrid::default())?;
    Ok(prefix_sups(&w, &ts, r as f64 + alpha).into_iter().map(|s| base + s).collect())
}

/// Simultaneous approximation of `D^r_{i,j} f` by `D^r_{i,j} V_n^μ f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimultaneousBall {
    /// `‖D^r_{i,j}(f − V_n^μ f)‖_{2,μ}`.
    pub residual: f64,
    /// `E_n(D^r_{i,j} f)_{2,μ}`.
    pub best: f64,
}

/// Uses `D^r_{i,j} V_n^μ = V_n^μ D^r_{i,j}` for planes of `B^d`.
pub fn simultaneous_ball(
    f: &FnHandle,
    spec: &BallKernelSpec,
    r: usize,
    i: usize,
    j: usize,
    rules: &BallRules,
) -> Result<SimultaneousBall> {
    Ok(simultaneous_ball_scan(f, std::slice::from_ref(spec), r, i, j, rules)?[0])
}

/// [`simultaneous_ball`] for several kernels, sharing one expansion of
/// `D^r_{i,j} f`.
pub fn simultaneous_ball_scan(
    f: &FnHandle,
    specs: &[BallKernelSpec],
    r: usize,
    i: usize,
    j: usize,
    rules: &BallRules,
) -> Result<Vec<SimultaneousBall>> {
    check_plane(rules.d(), i, j)?;
    let mut top = 0;
    for spec in specs {
        check_rule(spec, &rules.base)?;
        top = top.max((spec.coefficients().len() - 1).max(spec.n));
    }
    let h = dij_handle(f, r, i, j, DEFAULT_DERIVATIVE_STEP)?;
    let e = BallExpansion::new(&h, top, rules)?;
    specs
        .iter()
        .map(|spec| Ok(SimultaneousBall { residual: e.filtered_residual(&spec.coefficients())?, best: e.best_l2_error(spec.n)? }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::MultiPoly;
    use crate::sphere::{lp_norm_sphere, sphere_rule};
    use crate::sphere_approx::vn_apply;
    use approx::assert_abs_diff_eq;

    fn var(d: usize, i: usize) -> FnHandle {
        FnHandle::from_poly(Domain::Ball(d), format!("x{}", i + 1), MultiPoly::var(d, i)).unwrap()
    }

    fn legendre(k: usize, x: f64) -> f64 {
        let (mut a, mut b) = (1.0, x);
        if k == 0 {
            return 1.0;
        }
        for n in 1..k {
            let c = ((2 * n + 1) as f64 * x * b - n as f64 * a) / (n + 1) as f64;
            a = b;
            b = c;
        }
        b
    }

    #[test]
    fn kernel_normalization_and_symmetry() {
        for mu in [0.0, 0.5] {
            let spec = BallKernelSpec::new(3, 2, mu).unwrap();
            assert_abs_diff_eq!(pnmu_kernel(&spec, 0, &[0.3, 0.1], &[-0.2, 0.7]).unwrap(), 1.0, epsilon = 1e-15);
            let pts = [[0.3, 0.1], [-0.2, 0.7], [0.5, -0.5], [0.0, 0.0], [0.9, 0.1]];
            for x in &pts {
                for y in &pts {
                    for n in 0..6 {
                        let a = pnmu_kernel(&spec, n, x, y).unwrap();
                        let b = pnmu_kernel(&spec, n, y, x).unwrap();
                        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
                    }
                }
            }
        }
        assert!(pnmu_kernel(&BallKernelSpec::new(1, 2, 0.0).unwrap(), 1, &[1.2, 0.0], &[0.0, 0.0]).is_err());
        assert!(BallKernelSpec::new(1, 2, 0.3).is_err());
    }

    #[test]
    fn interval_kernel_is_legendre_product() {
        let spec = BallKernelSpec::new(1, 1, 0.5).unwrap();
        for k in 0..7 {
            for (x, y) in [(0.3, -0.6), (0.9, 0.1), (-0.2, -0.2)] {
                let want = (2 * k + 1) as f64 * legendre(k, x) * legendre(k, y);
                assert_abs_diff_eq!(pnmu_kernel(&spec, k, &[x], &[y]).unwrap(), want, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn reproducing_property() {
        for mu in [0.0, 0.5] {
            let spec = BallKernelSpec::new(1, 2, mu).unwrap();
            let rule = ball_rule(2, mu, 12).unwrap();
            let (x, z) = ([0.2, -0.4], [0.6, 0.3]);
            for k in 0..=4 {
                let lhs: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(y, w)| w * pnmu_kernel(&spec, k, &x, y).unwrap() * pnmu_kernel(&spec, k, y, &z).unwrap())
                    .sum::<f64>()
                    / rule.total_mass;
                assert_abs_diff_eq!(lhs, pnmu_kernel(&spec, k, &x, &z).unwrap(), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn vn_reproduces_low_degree() {
        let rule = ball_rule(2, 0.5, 24).unwrap();
        let spec = BallKernelSpec::new(3, 2, 0.5).unwrap();
        let v = vnmu_apply(&var(2, 0), &spec, &rule).unwrap();
        let one = vnmu_apply(&FnHandle::constant(Domain::Ball(2), 1.0), &spec, &rule).unwrap();
        for x in [[0.1, 0.2], [-0.5, 0.4], [0.0, 0.95]] {
            assert_abs_diff_eq!(v.call(&x), x[0], epsilon = 1e-10);
            assert_abs_diff_eq!(one.call(&x), 1.0, epsilon = 1e-10);
        }
        let q = FnHandle::from_poly(Domain::Ball(2), "q", &MultiPoly::var(2, 0).pow(2) * &MultiPoly::var(2, 1)).unwrap();
        let vq = vnmu_apply(&q, &spec, &rule).unwrap();
        assert_abs_diff_eq!(vq.call(&[0.3, -0.6]), 0.09 * -0.6, epsilon = 1e-10);
    }

    #[test]
    fn lift_consistency_with_sphere_operator() {
        let f = FnHandle::new(Domain::Ball(2), "e", |x| (x[0] - 0.5 * x[1]).exp());
        let spec = BallKernelSpec::new(4, 2, 0.0).unwrap();
        let ball = vnmu_apply(&f, &spec, &ball_rule(2, 0.0, 40).unwrap()).unwrap();
        let s = sphere_rule(3, 40).unwrap();
        let sph = vn_apply(&sphere_lift(&f).unwrap(), &ZonalSpec::new(4, 3).unwrap(), &s).unwrap();
        for x in [[0.1, 0.2], [-0.5, 0.4], [0.7, -0.7]] {
            let phi = phi_raw(&x);
            assert_abs_diff_eq!(ball.call(&x), sph.call(&[x[0], x[1], phi]), epsilon = 1e-8);
            assert_abs_diff_eq!(ball.call(&x), sph.call(&[x[0], x[1], -phi]), epsilon = 1e-8);
        }
    }

    #[test]
    fn best_error_interval_against_least_squares() {
        // x² on B^1 with dx: distance to span{1, x} is ‖x² − 1/3‖ = √(8/45).
        let rules = BallRules::new(1, 0.5, 20).unwrap();
        let f = FnHandle::from_poly(Domain::Ball(1), "x²", MultiPoly::var(1, 0).pow(2)).unwrap();
        assert_abs_diff_eq!(best_l2_error_ball(&f, 1, &rules, 6).unwrap(), (8.0f64 / 45.0).sqrt(), epsilon = 1e-12);
        assert!(best_l2_error_ball(&f, 2, &rules, 6).unwrap() < 1e-12);
    }

    #[test]
    fn lift_and_nodal_expansions_agree() {
        let f = FnHandle::new(Domain::Ball(2), "g", |x| 1.0 / (1.5 - x[0] + 0.3 * x[1]));
        let rules = BallRules::new(2, 0.0, 40).unwrap();
        let a = BallExpansion::new(&f, 12, &rules).unwrap();
        let b = BallExpansion::nodal(&f, 12, &rules.base).unwrap();
        assert!(matches!(a.data, ExpansionData::Lift(_)));
        assert_abs_diff_eq!(a.total_norm_sq(), b.total_norm_sq(), epsilon = 1e-10);
        let mut last = f64::INFINITY;
        for n in 0..=12 {
            let (x, y) = (a.best_l2_error(n).unwrap(), b.best_l2_error(n).unwrap());
            assert!((x - y).abs() < 1e-8 * b.total_norm_sq().sqrt(), "n={n}: {x} vs {y}");
            assert!(y <= last + 1e-14);
            last = y;
        }
        let spec = BallKernelSpec::new(4, 2, 0.0).unwrap();
        let c = spec.coefficients();
        assert_abs_diff_eq!(a.filtered_residual(&c).unwrap(), b.filtered_residual(&c).unwrap(), epsilon = 1e-9);
    }

    #[test]
    fn modulus_examples() {
        let grid = ThetaGrid::default();
        let c = FnHandle::constant(Domain::Ball(1), 2.0);
        let rules = BallRules::new(1, 0.0, 40).unwrap();
        assert_abs_diff_eq!(modulus_ball(&c, 1, 0.3, 2.0, &rules, &grid).unwrap(), 0.0, epsilon = 1e-14);
        // f = t on B^1, μ = 0: rotations of (cos ψ, sin ψ), sup |Δ_θ cos| = 2 sin(θ/2).
        let t = 0.4;
        let w = modulus_ball(&var(1, 0), 1, t, f64::INFINITY, &rules, &grid).unwrap();
        assert_abs_diff_eq!(w, 2.0 * (t / 2.0).sin(), epsilon = 1e-6);
    }

    #[test]
    fn lift_and_nodal_moduli_agree() {
        let f = FnHandle::new(Domain::Ball(2), "g", |x| (x[0] + 0.4 * x[1] * x[1]).sin());
        let rules = BallRules::new(2, 0.0, 48).unwrap();
        let grid = ThetaGrid { steps: 4 };
        let ts = [0.1, 0.4];
        let lifted = modulus_ball_profile(&f, 2, &ts, 2.0, &rules, &grid).unwrap();
        // Nodal route on the same rules with the lift disabled.
        let mut generic = rules.clone();
        generic.lifted.sphere = None;
        let nodal = modulus_ball_profile(&f, 2, &ts, 2.0, &generic, &grid).unwrap();
        for (a, b) in lifted.iter().zip(&nodal) {
            assert!((a / b - 1.0).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn hat_modulus_examples() {
        let rule = ball_rule(1, 0.5, 40).unwrap();
        let grid = ThetaGrid::default();
        let c = FnHandle::constant(Domain::Ball(1), 1.0);
        assert_eq!(hat_modulus_ball(&c, 1, 0.2, 2.0, &rule, &grid).unwrap(), 0.0);
        let t = 0.1;
        let w = hat_modulus_ball(&var(1, 0), 1, t, f64::INFINITY, &rule, &grid).unwrap();
        assert_abs_diff_eq!(w, t, epsilon = 1e-9);
    }

    #[test]
    fn sobolev_examples() {
        let rule = ball_rule(2, 0.5, 16).unwrap();
        let v = sobolev_norm_ball(&var(2, 0), 1, f64::INFINITY, &rule).unwrap();
        assert_abs_diff_eq!(v, 3.0, epsilon = 1e-9);
        let c = FnHandle::constant(Domain::Ball(2), 2.0);
        assert_abs_diff_eq!(
            sobolev_norm_ball(&c, 2, 2.0, &rule).unwrap(),
            lp_norm_ball_opts(&c, 2.0, &rule, &SupOptions::default()).unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn k_functional_brackets() {
        let rules = BallRules::new(1, 0.5, 64).unwrap();
        let f = FnHandle::new(Domain::Ball(1), "e", |x| (2.0 * x[0]).exp());
        let cands = kfunc_ball_candidates(&f, 2, 2.0, &rules, &[2, 4, 8]).unwrap();
        let best = cands.iter().map(|c| c.distance).fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(kfunc_ball_from_candidates(&cands, 2, 0.0).unwrap().value, best, epsilon = 0.0);
        // Exact series derivatives against the numerical extended-function route.
        let spec = BallKernelSpec::new(4, 1, 0.5).unwrap();
        let g = vnmu_apply(&f, &spec, &rules.base).unwrap();
        let h = d_id1_tilde_handle(&g, 2, 0, rules.lifted.domain).unwrap();
        let num = Nodes::lifted(&rules.lifted).norm(&|y| h.call(y), 2.0, &[], &SupOptions::default()).unwrap();
        assert!((cands[1].derivative / num - 1.0).abs() < 1e-6, "{} vs {num}", cands[1].derivative);
        let hat = phi_pow_di_pow_handle(&g, 2, 0, 1e-2).unwrap();
        let hn = lp_norm_ball_opts(&hat, 2.0, &rules.base, &SupOptions::default()).unwrap();
        assert!((cands[1].hat_derivative / hn - 1.0).abs() < 1e-6);
    }

    #[test]
    fn k_functional_lift_route_matches_sphere() {
        let rules = BallRules::new(2, 0.0, 40).unwrap();
        let f = FnHandle::new(Domain::Ball(2), "e", |x| (x[0] * x[1]).cos());
        let c = kfunc_ball_candidates(&f, 1, 2.0, &rules, &[4]).unwrap()[0];
        let s = rules.lifted.sphere.as_ref().unwrap();
        let lf = sphere_lift(&f).unwrap();
        let g = vn_apply(&lf, &ZonalSpec::new(4, 3).unwrap(), s).unwrap();
        let direct = lp_norm_sphere(&lf.sub(&g).unwrap(), 2.0, s).unwrap() / 2f64.sqrt();
        assert_abs_diff_eq!(c.distance, direct, epsilon = 1e-10);
        assert!(c.hat_derivative > 0.0 && c.derivative > 0.0);
    }

    #[test]
    fn simultaneous_commutes() {
        let rules = BallRules::new(2, 0.5, 24).unwrap();
        let f = FnHandle::new(Domain::Ball(2), "e", |x| (0.5 * x[0] + x[1]).exp());
        let spec = BallKernelSpec::new(3, 2, 0.5).unwrap();
        let s = simultaneous_ball(&f, &spec, 1, 0, 1, &rules).unwrap();
        let g = vnmu_apply(&f, &spec, &rules.base).unwrap();
        let dg = dij_handle(&g, 1, 0, 1, DEFAULT_DERIVATIVE_STEP).unwrap();
        let df = dij_handle(&f, 1, 0, 1, DEFAULT_DERIVATIVE_STEP).unwrap();
        let direct = lp_norm_ball_opts(&df.sub(&dg).unwrap(), 2.0, &rules.base, &SupOptions::default()).unwrap();
        assert!((s.residual / direct - 1.0).abs() < 1e-5, "{} vs {direct}", s.residual);
        assert!(s.residual <= 10.0 * s.best && s.best > 0.0);
    }

    #[test]
    fn lipschitz_examples() {
        let rules = BallRules::new(2, 0.5, 16).unwrap();
        let grid = ThetaGrid { steps: 4 };
        let c = FnHandle::constant(Domain::Ball(2), 3.0);
        let v = lipschitz_norm_ball(&c, 1, 0.5, 1, 2.0, &rules, &grid).unwrap();
        assert_abs_diff_eq!(v, lp_norm_ball_opts(&c, 2.0, &rules.base, &SupOptions::default()).unwrap(), epsilon = 1e-12);
        let p = FnHandle::from_poly(Domain::Ball(2), "p", &MultiPoly::var(2, 0) * &MultiPoly::var(2, 1)).unwrap();
        let a = lipschitz_norm_ball(&p, 1, 0.0, 1, 2.0, &rules, &grid).unwrap();
        assert!(a.is_finite() && a > 0.0);
        let h = hnorm_ball(&p, 1, 0.5, 1, 2.0, &BallRules::new(2, 0.0, 24).unwrap(), 3).unwrap();
        assert!(h.is_finite() && h > 0.0);
    }

    #[test]
    fn dyadic_norms_match_single_level_calls() {
        let p = FnHandle::from_poly(Domain::Ball(2), "p", &MultiPoly::var(2, 0).pow(3) * &MultiPoly::var(2, 1)).unwrap();
        for mu in [0.0, 0.5] {
            let rules = BallRules::new(2, mu, 16).unwrap();
            let lips = lipschitz_norm_ball_dyadic(&p, 1, 0.5, 1, 2.0, &rules, &[1, 3]).unwrap();
            let hs = hnorm_ball_dyadic(&p, 1, 0.5, 1, 2.0, &rules, 3).unwrap();
            for (v, k) in lips.iter().zip([1, 3]) {
                let one = lipschitz_norm_ball(&p, 1, 0.5, 1, 2.0, &rules, &ThetaGrid { steps: 1 << k }).unwrap();
                assert_abs_diff_eq!(*v, one, epsilon = 1e-12 * one);
            }
            for (k, v) in hs.iter().enumerate() {
                assert_abs_diff_eq!(*v, hnorm_ball(&p, 1, 0.5, 1, 2.0, &rules, k).unwrap(), epsilon = 1e-12 * v);
            }
            assert!(hs.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}

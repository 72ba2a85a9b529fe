//! Zonal operators on `S^{d-1}`: degree projections, the near-best operator
//! `V_n`, best `L²` errors, moduli of smoothness, K-functionals and the
//! Sobolev and Lipschitz-type norms.
//!
//! Every zonal operator `T f = Σ_k a_k proj_k f` has two backends. The kernel
//! backend evaluates `(1/ω) Σ_y w_y f(y) Σ_k a_k Z_k(⟨x, y⟩)` directly and works
//! for any `d`. The spectral backend (d = 3 ring rules only) computes the same
//! quadrature sums through [`S2Spectrum`].

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{check_dim, Error, Result};
use crate::func::{Domain, FnHandle};
use crate::ortho::{zonal_all, zonal_raw, zonal_series, zonal_series_derivative, CutoffEta, GegenbauerParam};
use crate::poly::{dij_pow_poly, Exponent, MultiPoly};
use crate::spectral::{frame_inverse, plane_frame, S2Spectrum};
use crate::sphere::{
    check_p, check_plane, default_half_width, dij_num_raw, dot, forward_diff_raw, lp_from_values, lp_norm_sphere_opts,
    refine_sup_seeded, rotate_plane, sphere_area, values_on, SphereRule, SupOptions,
};

pub use crate::ortho::zonal_eval;

/// Parameters of the near-best operator `V_n` on `S^{d-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZonalSpec {
    n: usize,
    d: usize,
    eta: CutoffEta,
    lam: GegenbauerParam,
}

impl ZonalSpec {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        Self::with_eta(n, d, CutoffEta::default())
    }

    pub fn with_eta(n: usize, d: usize, eta: CutoffEta) -> Result<Self> {
        let lam = GegenbauerParam::for_sphere_dim(d)?;
        Ok(ZonalSpec { n, d, eta, lam })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn lambda(&self) -> f64 {
        self.lam.lambda()
    }

    pub fn eta(&self) -> &CutoffEta {
        &self.eta
    }

    /// Multipliers `η(k/n)` with trailing zeros removed; `V_0` is the mean.
    pub fn coefficients(&self) -> Vec<f64> {
        if self.n == 0 {
            return vec![1.0];
        }
        let mut c = self.eta.coefficients(self.n);
        while c.len() > 1 && *c.last().unwrap() == 0.0 {
            c.pop();
        }
        c
    }

    /// Highest degree with a nonzero multiplier.
    pub fn kernel_degree(&self) -> usize {
        self.coefficients().len() - 1
    }

    /// `K_n(t) = Σ_k η(k/n) Z_k(t)`.
    pub fn kernel(&self, t: f64) -> Result<f64> {
        if t.abs() > 1.0 + 1e-12 {
            return Err(Error::usage(format!("kernel argument {t} outside [-1, 1]")));
        }
        Ok(zonal_series(&self.coefficients(), self.lambda(), t.clamp(-1.0, 1.0)))
    }
}

/// How zonal operators are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Spectral when the rule supports it, kernel otherwise.
    #[default]
    Auto,
    Kernel,
    Spectral,
}

fn use_spectral(backend: Backend, rule: &SphereRule, lmax: usize) -> Result<bool> {
    match backend {
        Backend::Auto => Ok(S2Spectrum::supports(rule, lmax)),
        Backend::Kernel => Ok(false),
        Backend::Spectral if S2Spectrum::supports(rule, lmax) => Ok(true),
        Backend::Spectral => Err(Error::usage(format!(
            "spectral backend needs an S^2 ring rule of exactness ≥ {lmax}"
        ))),
    }
}

struct KernelData {
    points: Vec<Vec<f64>>,
    fw: Vec<f64>,
    coeffs: Vec<f64>,
    lambda: f64,
}

fn kernel_data(f: &FnHandle, a: &[f64], rule: &SphereRule) -> Result<Arc<KernelData>> {
    check_dim(rule.dim, f.dim())?;
    let v = values_on(f, &rule.points)?;
    let fw = v.iter().zip(&rule.weights).map(|(v, w)| v * w / rule.total_mass).collect();
    Ok(Arc::new(KernelData {
        points: rule.points.clone(),
        fw,
        coeffs: a.to_vec(),
        lambda: (rule.dim as f64 - 2.0) / 2.0,
    }))
}

impl KernelData {
    fn eval(&self, x: &[f64]) -> f64 {
        self.points
            .iter()
            .zip(&self.fw)
            .map(|(y, fw)| fw * zonal_series(&self.coeffs, self.lambda, dot(x, y).clamp(-1.0, 1.0)))
            .sum()
    }

    /// `D^r_{i,j}` of the operator output, using the jets of `K(⟨x, y⟩)`.
    fn eval_dij(&self, jets: &[Jet], r: usize, i: usize, j: usize, x: &[f64]) -> f64 {
        let mut kd = vec![0.0; r + 1];
        let mut acc = 0.0;
        for (y, fw) in self.points.iter().zip(&self.fw) {
            let u = dot(x, y).clamp(-1.0, 1.0);
            let v = x[j] * y[i] - x[i] * y[j];
            let w = x[i] * y[i] + x[j] * y[j];
            for (m, k) in kd.iter_mut().enumerate() {
                *k = zonal_series_derivative(&self.coeffs, self.lambda, m, u);
            }
            let s: f64 = jets
                .iter()
                .map(|jet| jet.coef * kd[jet.a] * v.powi(jet.b as i32) * w.powi(jet.c as i32))
                .sum();
            acc += fw * s;
        }
        acc
    }
}

/// One term `coef · K^{(a)}(u) · v^b · w^c` of `D^r_{i,j} K(⟨x, y⟩)`, where
/// `u = ⟨x, y⟩`, `v = x_j y_i − x_i y_j` and `w = x_i y_i + x_j y_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Jet {
    a: usize,
    b: usize,
    c: usize,
    coef: f64,
}

/// Uses `D u = v`, `D v = −w`, `D w = v`.
fn dij_jets(r: usize) -> Vec<Jet> {
    let mut cur: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
    cur.insert((0, 0, 0), 1.0);
    for _ in 0..r {
        let mut next: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
        for (&(a, b, c), &coef) in &cur {
            *next.entry((a + 1, b + 1, c)).or_default() += coef;
            if b > 0 {
                *next.entry((a, b - 1, c + 1)).or_default() -= coef * b as f64;
            }
            if c > 0 {
                *next.entry((a, b + 1, c - 1)).or_default() += coef * c as f64;
            }
        }
        next.retain(|_, v| *v != 0.0);
        cur = next;
    }
    cur.into_iter().map(|((a, b, c), coef)| Jet { a, b, c, coef }).collect()
}

/// A function given by a spectrum in the frame of [`plane_frame`]; norms are
/// frame-independent so they are taken in frame coordinates.
struct FrameSpectrum {
    spec: S2Spectrum,
    frame: [usize; 3],
}

impl FrameSpectrum {
    fn eval(&self, y: &[f64]) -> f64 {
        self.spec.eval(&frame_inverse(&self.frame, y))
    }

    fn lp_norm(&self, p: f64, rule: &SphereRule, opts: &SupOptions) -> Result<f64> {
        let v = self.spec.synthesize(rule)?;
        Ok(norm_from_nodes(&v, p, rule, opts, &|x| self.spec.eval(x), &[]))
    }
}

fn norm_from_nodes(
    values: &[f64],
    p: f64,
    rule: &SphereRule,
    opts: &SupOptions,
    g: &(dyn Fn(&[f64]) -> f64 + Sync),
    seeds: &[Vec<f64>],
) -> f64 {
    if p.is_infinite() {
        let a: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        let h = |x: &[f64]| g(x).abs();
        refine_sup_seeded(&h, rule.domain(), &rule.points, &a, seeds, rule.spacing(), opts)
    } else {
        lp_from_values(values, &rule.weights, p)
    }
}

/// Points `Q_{i,j,−kθ} h`, `0 ≤ k ≤ r`, from which the `r`-th difference
/// samples the hotspot `h`.
pub(crate) fn orbit_seeds(hotspots: &[Vec<f64>], r: usize, i: usize, j: usize, theta: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for h in hotspots {
        for k in 0..=r {
            let mut y = h.clone();
            rotate_plane(&mut y, i, j, -(k as f64) * theta);
            out.push(y);
        }
    }
    out
}

fn frame_spectrum(f: &FnHandle, a: &[f64], r: usize, i: usize, j: usize, rule: &SphereRule) -> Result<FrameSpectrum> {
    let lmax = a.len().saturating_sub(1);
    let frame = plane_frame(i, j)?;
    let spec = S2Spectrum::analyze_in_plane(f, i, j, rule, lmax)?.multiplier(a).dphi_pow(r);
    Ok(FrameSpectrum { spec, frame })
}

/// `T f = Σ_k a_k proj_k f` (the multipliers `a` define a zonal operator).
pub fn zonal_multiplier(f: &FnHandle, a: &[f64], rule: &SphereRule, backend: Backend) -> Result<FnHandle> {
    check_dim(rule.dim, f.dim())?;
    let lmax = a.len().saturating_sub(1);
    let name = format!("T[{}]", f.name());
    if use_spectral(backend, rule, lmax)? {
        let spec = S2Spectrum::analyze_fn(f, rule, lmax)?.multiplier(a);
        return Ok(FnHandle::new(rule.domain(), name, move |x| spec.eval(x)).with_meta("degree", lmax as f64));
    }
    let data = kernel_data(f, a, rule)?;
    Ok(FnHandle::new(rule.domain(), name, move |x| data.eval(x)).with_meta("degree", lmax as f64))
}

/// `D^r_{i,j} T f` for the zonal operator with multipliers `a`, differentiated
/// exactly (kernel jets or coefficient action).
pub fn zonal_multiplier_dij(
    f: &FnHandle,
    a: &[f64],
    r: usize,
    i: usize,
    j: usize,
    rule: &SphereRule,
    backend: Backend,
) -> Result<FnHandle> {
    check_dim(rule.dim, f.dim())?;
    check_plane(rule.dim, i, j)?;
    let lmax = a.len().saturating_sub(1);
    let name = format!("D^{r}_{},{}T[{}]", i + 1, j + 1, f.name());
    if use_spectral(backend, rule, lmax)? {
        let fs = frame_spectrum(f, a, r, i, j, rule)?;
        return Ok(FnHandle::new(rule.domain(), name, move |y| fs.eval(y)));
    }
    let data = kernel_data(f, a, rule)?;
    let jets = dij_jets(r);
    Ok(FnHandle::new(rule.domain(), name, move |x| data.eval_dij(&jets, r, i, j, x)))
}

fn unit_multiplier(k: usize) -> Vec<f64> {
    let mut a = vec![0.0; k + 1];
    a[k] = 1.0;
    a
}

/// `proj_k f` by quadrature of the reproducing kernel `Z_k`.
pub fn project_degree(f: &FnHandle, k: usize, rule: &SphereRule) -> Result<FnHandle> {
    zonal_multiplier(f, &unit_multiplier(k), rule, Backend::Auto)
}

/// Power-basis coefficients of `Z_k` in `t`.
fn zonal_power_coeffs(k: usize, lambda: f64) -> Vec<f64> {
    let mut c0 = vec![1.0];
    if k == 0 {
        return c0;
    }
    let lead = if lambda == 0.0 { 1.0 } else { 2.0 * lambda };
    let mut c1 = vec![0.0, lead];
    for m in 2..=k {
        let mf = m as f64;
        let (a, b) = if lambda == 0.0 {
            (2.0, 1.0)
        } else {
            (2.0 * (mf + lambda - 1.0) / mf, (mf + 2.0 * lambda - 2.0) / mf)
        };
        let mut c2 = vec![0.0; m + 1];
        for (e, v) in c1.iter().enumerate() {
            c2[e + 1] += a * v;
        }
        for (e, v) in c0.iter().enumerate() {
            c2[e] -= b * v;
        }
        c0 = c1;
        c1 = c2;
    }
    let scale = if lambda == 0.0 { 2.0 } else { (k as f64 + lambda) / lambda };
    c1.iter().map(|v| v * scale).collect()
}

fn exponents_of_degree(d: usize, j: u32) -> Vec<Exponent> {
    fn rec(i: usize, left: u32, e: &mut Exponent, out: &mut Vec<Exponent>) {
        if i + 1 == e.len() {
            e[i] = left;
            out.push(e.clone());
            return;
        }
        for k in 0..=left {
            e[i] = k;
            rec(i + 1, left - k, e, out);
        }
    }
    let mut out = Vec::new();
    rec(0, j, &mut vec![0; d], &mut out);
    out
}

/// `∫_{S^{d-1}} y^β dσ(y)`.
pub fn sphere_moment(beta: &[u32]) -> f64 {
    if beta.iter().any(|b| b % 2 == 1) {
        return 0.0;
    }
    let d = beta.len() as f64;
    let total: u32 = beta.iter().sum();
    let ln: f64 = beta.iter().map(|&b| ln_gamma((b as f64 + 1.0) / 2.0)).sum::<f64>()
        - ln_gamma((total as f64 + d) / 2.0);
    2.0 * ln.exp()
}

fn multinomial(alpha: &[u32]) -> f64 {
    let mut acc = 1.0;
    let mut n = 0u32;
    for &a in alpha {
        for k in 1..=a {
            n += 1;
            acc *= n as f64 / k as f64;
        }
    }
    acc
}

/// Exact `proj_k p` as a homogeneous harmonic polynomial, from the power
/// expansion of `Z_k(⟨x, y⟩)` and closed-form sphere moments.
pub fn project_degree_poly(p: &MultiPoly, k: usize) -> Result<MultiPoly> {
    let d = p.dim();
    if d < 2 {
        return Err(Error::usage("projections need d ≥ 2"));
    }
    let z = zonal_power_coeffs(k, (d as f64 - 2.0) / 2.0);
    let omega = sphere_area(d);
    let mut terms = Vec::new();
    for j in (k % 2..=k).step_by(2) {
        if z[j] == 0.0 {
            continue;
        }
        for alpha in exponents_of_degree(d, j as u32) {
            let mut m = 0.0;
            for (beta, c) in p.terms() {
                let s: Vec<u32> = alpha.iter().zip(beta).map(|(a, b)| a + b).collect();
                m += c * sphere_moment(&s);
            }
            if m != 0.0 {
                let c = z[j] * multinomial(&alpha) * m / omega;
                terms.push((alpha, c));
            }
        }
    }
    MultiPoly::from_terms(d, terms).homogenize_on_sphere(k as u32)
}

/// `V_n f` with the automatic backend.
pub fn vn_apply(f: &FnHandle, spec: &ZonalSpec, rule: &SphereRule) -> Result<FnHandle> {
    vn_apply_with(f, spec, rule, Backend::Auto)
}

pub fn vn_apply_with(f: &FnHandle, spec: &ZonalSpec, rule: &SphereRule, backend: Backend) -> Result<FnHandle> {
    check_dim(spec.d, rule.dim)?;
    let g = zonal_multiplier(f, &spec.coefficients(), rule, backend)?;
    Ok(g.with_name(format!("V_{}[{}]", spec.n, f.name())))
}

/// `D^r_{i,j} V_n f`, differentiated exactly.
pub fn vn_dij(f: &FnHandle, spec: &ZonalSpec, r: usize, i: usize, j: usize, rule: &SphereRule) -> Result<FnHandle> {
    vn_dij_with(f, spec, r, i, j, rule, Backend::Auto)
}

pub fn vn_dij_with(
    f: &FnHandle,
    spec: &ZonalSpec,
    r: usize,
    i: usize,
    j: usize,
    rule: &SphereRule,
    backend: Backend,
) -> Result<FnHandle> {
    check_dim(spec.d, rule.dim)?;
    zonal_multiplier_dij(f, &spec.coefficients(), r, i, j, rule, backend)
}

enum Components {
    Spectral(S2Spectrum),
    Nodal(Vec<Vec<f64>>),
}

/// Degree components `proj_k f`, `k ≤ N`, with their squared norms.
pub struct HarmonicExpansion {
    max_degree: usize,
    degree_norms_sq: Vec<f64>,
    total_norm_sq: f64,
    components: Components,
}

impl std::fmt::Debug for HarmonicExpansion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HarmonicExpansion")
            .field("max_degree", &self.max_degree)
            .field("degree_norms_sq", &self.degree_norms_sq)
            .field("total_norm_sq", &self.total_norm_sq)
            .finish()
    }
}

impl HarmonicExpansion {
    pub fn new(f: &FnHandle, max_degree: usize, rule: &SphereRule) -> Result<Self> {
        Self::with_backend(f, max_degree, rule, Backend::Auto)
    }

    pub fn with_backend(f: &FnHandle, max_degree: usize, rule: &SphereRule, backend: Backend) -> Result<Self> {
        check_dim(rule.dim, f.dim())?;
        let v = values_on(f, &rule.points)?;
        let total_norm_sq = rule.integrate_values(&v.iter().map(|x| x * x).collect::<Vec<_>>());
        if use_spectral(backend, rule, max_degree)? {
            let spec = S2Spectrum::analyze(&v, rule, max_degree)?;
            return Ok(HarmonicExpansion {
                max_degree,
                degree_norms_sq: spec.degree_norms_sq(),
                total_norm_sq,
                components: Components::Spectral(spec),
            });
        }
        let lambda = (rule.dim as f64 - 2.0) / 2.0;
        let fw: Vec<f64> = v.iter().zip(&rule.weights).map(|(v, w)| v * w / rule.total_mass).collect();
        let per_node: Vec<Vec<f64>> = rule
            .points
            .par_iter()
            .map(|x| {
                let mut z = vec![0.0; max_degree + 1];
                let mut acc = vec![0.0; max_degree + 1];
                for (y, w) in rule.points.iter().zip(&fw) {
                    zonal_all(lambda, dot(x, y).clamp(-1.0, 1.0), &mut z);
                    for (a, zk) in acc.iter_mut().zip(&z) {
                        *a += w * zk;
                    }
                }
                acc
            })
            .collect();
        let comps: Vec<Vec<f64>> = (0..=max_degree).map(|k| per_node.iter().map(|row| row[k]).collect()).collect();
        let degree_norms_sq = comps
            .iter()
            .map(|c| rule.integrate_values(&c.iter().map(|x| x * x).collect::<Vec<_>>()))
            .collect();
        Ok(HarmonicExpansion { max_degree, degree_norms_sq, total_norm_sq, components: Components::Nodal(comps) })
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

    /// `‖f‖² − Σ_{k ≤ N} ‖proj_k f‖²`.
    pub fn tail_defect(&self) -> f64 {
        self.total_norm_sq - self.parseval_sum()
    }

    /// `proj_k f` at the rule's nodes.
    pub fn component_values(&self, k: usize, rule: &SphereRule) -> Result<Vec<f64>> {
        if k > self.max_degree {
            return Err(Error::usage(format!("degree {k} beyond expansion degree {}", self.max_degree)));
        }
        match &self.components {
            Components::Spectral(s) => s.multiplier(&unit_multiplier(k)).synthesize(rule),
            Components::Nodal(c) => Ok(c[k].clone()),
        }
    }

    /// `E_n(f)_2`, the distance to `Π_{n−1}`, by Parseval.
    pub fn best_l2_error(&self, n: usize) -> Result<f64> {
        if n > self.max_degree + 1 {
            return Err(Error::usage(format!("E_{n} needs components up to degree {}", n - 1)));
        }
        Ok(tail_error(&self.degree_norms_sq, self.total_norm_sq, n)?.sqrt())
    }
}

/// Relative size below which the Parseval defect is treated as rounding.
const DEFECT_FLOOR: f64 = 1e-13;

/// `Σ_{k ≥ n} ‖proj_k f‖²`: the listed components are summed directly and
/// the remainder past the last one is added only when it exceeds rounding.
pub(crate) fn tail_error(degree_norms_sq: &[f64], total: f64, n: usize) -> Result<f64> {
    let defect = total - degree_norms_sq.iter().sum::<f64>();
    if defect < -1e-8 * total.max(1.0) {
        return Err(Error::Numerical(format!("negative Parseval remainder {defect:e}")));
    }
    let beyond = if defect > DEFECT_FLOOR * total { defect } else { 0.0 };
    Ok(degree_norms_sq.get(n..).map_or(0.0, |s| s.iter().sum::<f64>()) + beyond)
}

/// `E_n(f)_2 = inf_{g ∈ Π_{n−1}} ‖f − g‖_2` from an expansion to degree `n_max`.
pub fn best_l2_error(f: &FnHandle, n: usize, rule: &SphereRule, n_max: usize) -> Result<f64> {
    if n_max + 1 < n {
        return Err(Error::usage(format!("N_max = {n_max} is below n − 1 = {}", n - 1)));
    }
    HarmonicExpansion::new(f, n_max.max(n.saturating_sub(1)), rule)?.best_l2_error(n)
}

/// Upper estimate `‖f − V_n f‖_p`, with `E_n(f)_2` alongside when `p = 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnBracket {
    pub upper: f64,
    pub best_l2: Option<f64>,
}

pub fn en_upper(f: &FnHandle, n: usize, p: f64, rule: &SphereRule) -> Result<EnBracket> {
    check_p(p)?;
    let spec = ZonalSpec::new(n, rule.dim)?;
    let upper = distance_to_vn(f, &spec, p, rule, &SupOptions::default())?;
    let best_l2 = if p == 2.0 { Some(best_l2_error(f, n, rule, n)?) } else { None };
    Ok(EnBracket { upper, best_l2 })
}

/// `‖f − V_n f‖_p`.
fn distance_to_vn(f: &FnHandle, spec: &ZonalSpec, p: f64, rule: &SphereRule, opts: &SupOptions) -> Result<f64> {
    let a = spec.coefficients();
    let lmax = a.len() - 1;
    if use_spectral(Backend::Auto, rule, lmax)? {
        let fv = values_on(f, &rule.points)?;
        let s = S2Spectrum::analyze(&fv, rule, lmax)?.multiplier(&a);
        let gv = s.synthesize(rule)?;
        let diff: Vec<f64> = fv.iter().zip(&gv).map(|(a, b)| a - b).collect();
        return Ok(norm_from_nodes(&diff, p, rule, opts, &|x| f.call(x) - s.eval(x), f.hotspots()));
    }
    let g = vn_apply(f, spec, rule)?;
    lp_norm_sphere_opts(&f.sub(&g)?, p, rule, opts)
}

/// Sampling of rotation angles: `θ_k = k t / steps`, `k = 1..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThetaGrid {
    pub steps: usize,
}

impl Default for ThetaGrid {
    fn default() -> Self {
        ThetaGrid { steps: 16 }
    }
}

impl ThetaGrid {
    pub fn angles(&self, t: f64) -> Vec<f64> {
        let m = self.steps.max(1);
        (1..=m).map(|k| t * k as f64 / m as f64).collect()
    }
}

fn planes(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect()
}

/// `‖Δ^r_{i,j,θ} f‖_p` for each `θ`. At `p = 2` on ring rules the norms come
/// from the spectrum in the plane frame (degrees up to half the exactness);
/// otherwise rotated nodes are evaluated directly.
pub fn plane_difference_norms(
    f: &FnHandle,
    r: usize,
    i: usize,
    j: usize,
    thetas: &[f64],
    p: f64,
    rule: &SphereRule,
    opts: &SupOptions,
) -> Result<Vec<f64>> {
    check_p(p)?;
    check_dim(rule.dim, f.dim())?;
    check_plane(rule.dim, i, j)?;
    if r == 0 {
        return Err(Error::usage("difference order must be ≥ 1"));
    }
    let lmax = rule.exactness / 2;
    if p == 2.0 && S2Spectrum::supports(rule, lmax) {
        let s = S2Spectrum::analyze_in_plane(f, i, j, rule, lmax)?;
        return Ok(thetas.iter().map(|&th| s.azimuthal_difference_norm_sq(r, th).sqrt()).collect());
    }
    nodal_difference_norms(f, r, i, j, thetas, p, rule, opts)
}

fn nodal_difference_norms(
    f: &FnHandle,
    r: usize,
    i: usize,
    j: usize,
    thetas: &[f64],
    p: f64,
    rule: &SphereRule,
    opts: &SupOptions,
) -> Result<Vec<f64>> {
    let g = |y: &[f64]| f.call(y);
    thetas
        .iter()
        .map(|&th| {
            let v: Vec<f64> = rule.points.par_iter().map(|x| forward_diff_raw(&g, r, i, j, th, x)).collect();
            if let Some(k) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::Evaluation { node: k, value: v[k] });
            }
            let h = |x: &[f64]| forward_diff_raw(&g, r, i, j, th, x);
            let seeds = orbit_seeds(f.hotspots(), r, i, j, th);
            Ok(norm_from_nodes(&v, p, rule, opts, &h, &seeds))
        })
        .collect()
}

/// `ω_r(f, t)_p = max_{i<j} sup_{0<θ≤t} ‖Δ^r_{i,j,θ} f‖_p` over the θ-grid.
pub fn modulus_sphere(f: &FnHandle, r: usize, t: f64, p: f64, rule: &SphereRule, grid: &ThetaGrid) -> Result<f64> {
    Ok(modulus_sphere_profile(f, r, &[t], p, rule, grid)?[0])
}

/// Moduli at several `t`, made nondecreasing in `t` by a running maximum.
pub fn modulus_sphere_profile(
    f: &FnHandle,
    r: usize,
    ts: &[f64],
    p: f64,
    rule: &SphereRule,
    grid: &ThetaGrid,
) -> Result<Vec<f64>> {
    modulus_profile_opts(f, r, ts, p, rule, grid, &SupOptions::default())
}

pub fn modulus_profile_opts(
    f: &FnHandle,
    r: usize,
    ts: &[f64],
    p: f64,
    rule: &SphereRule,
    grid: &ThetaGrid,
    opts: &SupOptions,
) -> Result<Vec<f64>> {
    if let Some(t) = ts.iter().find(|t| !(**t > 0.0 && **t <= std::f64::consts::PI)) {
        return Err(Error::usage(format!("modulus step t = {t} outside (0, π]")));
    }
    let mut order: Vec<usize> = (0..ts.len()).collect();
    order.sort_by(|&a, &b| ts[a].total_cmp(&ts[b]));
    let thetas: Vec<Vec<f64>> = ts.iter().map(|&t| grid.angles(t)).collect();
    let flat: Vec<f64> = thetas.iter().flatten().copied().collect();
    let mut best = vec![0.0_f64; flat.len()];
    for (i, j) in planes(rule.dim) {
        let norms = plane_difference_norms(f, r, i, j, &flat, p, rule, opts)?;
        for (b, v) in best.iter_mut().zip(norms) {
            *b = b.max(v);
        }
    }
    let mut per_t = Vec::with_capacity(ts.len());
    let mut offset = 0;
    for th in &thetas {
        per_t.push(best[offset..offset + th.len()].iter().cloned().fold(0.0, f64::max));
        offset += th.len();
    }
    let mut out = vec![0.0; ts.len()];
    let mut running = 0.0_f64;
    for k in order {
        running = running.max(per_t[k]);
        out[k] = running;
    }
    Ok(out)
}

/// One candidate `g = V_m f` of the K-functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KCandidate {
    pub degree: usize,
    /// `‖f − g‖_p`.
    pub distance: f64,
    /// `max_{i<j} ‖D^r_{i,j} g‖_p`.
    pub derivative: f64,
}

impl KCandidate {
    pub fn value(&self, r: usize, t: f64) -> f64 {
        self.distance + t.powi(r as i32) * self.derivative
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KValue {
    pub value: f64,
    pub argmin: KCandidate,
}

/// Distances and derivative norms of the candidates `V_m f`, `m ∈ degrees`.
pub fn kfunc_sphere_candidates(
    f: &FnHandle,
    r: usize,
    p: f64,
    rule: &SphereRule,
    degrees: &[usize],
) -> Result<Vec<KCandidate>> {
    check_p(p)?;
    if degrees.is_empty() {
        return Err(Error::usage("K-functional needs at least one candidate degree"));
    }
    let opts = SupOptions::default();
    degrees
        .iter()
        .map(|&m| {
            let spec = ZonalSpec::new(m, rule.dim)?;
            let distance = distance_to_vn(f, &spec, p, rule, &opts)?;
            let a = spec.coefficients();
            let mut derivative = 0.0_f64;
            for (i, j) in planes(rule.dim) {
                let n = if use_spectral(Backend::Auto, rule, a.len() - 1)? {
                    frame_spectrum(f, &a, r, i, j, rule)?.lp_norm(p, rule, &opts)?
                } else {
                    let g = zonal_multiplier_dij(f, &a, r, i, j, rule, Backend::Kernel)?;
                    lp_norm_sphere_opts(&g, p, rule, &opts)?
                };
                derivative = derivative.max(n);
            }
            Ok(KCandidate { degree: m, distance, derivative })
        })
        .collect()
}

/// Minimizes `distance + t^r derivative` over precomputed candidates.
pub fn kfunc_from_candidates(cands: &[KCandidate], r: usize, t: f64) -> Result<KValue> {
    let best = cands
        .iter()
        .min_by(|a, b| a.value(r, t).total_cmp(&b.value(r, t)))
        .ok_or_else(|| Error::usage("no K-functional candidates"))?;
    Ok(KValue { value: best.value(r, t), argmin: *best })
}

/// Upper bound of `K_r(f, t)_p` over the candidates `V_m f`.
pub fn kfunc_sphere_upper(
    f: &FnHandle,
    r: usize,
    t: f64,
    p: f64,
    rule: &SphereRule,
    degrees: &[usize],
) -> Result<KValue> {
    kfunc_from_candidates(&kfunc_sphere_candidates(f, r, p, rule, degrees)?, r, t)
}

/// `(−Δ_0)^s f` truncated at degree `N`.
pub fn frac_laplacian_l2(f: &FnHandle, s: f64, n_max: usize, rule: &SphereRule) -> Result<FnHandle> {
    if s <= 0.0 {
        return Err(Error::usage(format!("fractional order must be positive, got {s}")));
    }
    let d = rule.dim as f64;
    let a: Vec<f64> = (0..=n_max).map(|k| (k as f64 * (k as f64 + d - 2.0)).powf(s)).collect();
    zonal_multiplier(f, &a, rule, Backend::Auto)
}

/// `D^r_{i,j} f`: exact on polynomial handles, otherwise a central stencil
/// with step `h`. `r = 0` returns `f`.
pub fn dij_handle(f: &FnHandle, r: usize, i: usize, j: usize, h: f64) -> Result<FnHandle> {
    check_plane(f.dim(), i, j)?;
    if r == 0 {
        return Ok(f.clone());
    }
    let name = format!("D^{r}_{},{}[{}]", i + 1, j + 1, f.name());
    if let Some(p) = f.poly() {
        return FnHandle::from_poly(f.domain(), name, dij_pow_poly(p, i, j, r as u32)?);
    }
    if !(1e-4..=1e-1).contains(&h) {
        return Err(Error::usage(format!("finite-difference step {h} outside [1e-4, 1e-1]")));
    }
    let g = f.clone();
    let q = default_half_width(r);
    Ok(FnHandle::new(f.domain(), name, move |x| dij_num_raw(&|y| g.call(y), r, i, j, x, h, q)))
}

/// `‖f‖_p + Σ_{i<j} ‖D^r_{i,j} f‖_p`.
pub fn sobolev_norm_sphere(f: &FnHandle, r: usize, p: f64, rule: &SphereRule, h: f64) -> Result<f64> {
    let opts = SupOptions::default();
    let mut acc = lp_norm_sphere_opts(f, p, rule, &opts)?;
    for (i, j) in planes(rule.dim) {
        acc += lp_norm_sphere_opts(&dij_handle(f, r, i, j, h)?, p, rule, &opts)?;
    }
    Ok(acc)
}

/// Step used for numerical angular derivatives inside the norms below.
pub const DEFAULT_DERIVATIVE_STEP: f64 = 2e-3;

/// `‖f‖_p + max_{i<j} sup_{0<θ≤1} ‖Δ^ℓ_{i,j,θ}(D^r_{i,j} f)‖_p / θ^α`.
pub fn lipschitz_norm_sphere(
    f: &FnHandle,
    r: usize,
    alpha: f64,
    ell: usize,
    p: f64,
    rule: &SphereRule,
    grid: &ThetaGrid,
) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) || ell == 0 {
        return Err(Error::usage(format!("need 0 ≤ α < 1 and ℓ ≥ 1, got α = {alpha}, ℓ = {ell}")));
    }
    let opts = SupOptions::default();
    let base = lp_norm_sphere_opts(f, p, rule, &opts)?;
    let thetas = grid.angles(1.0);
    let mut sup = 0.0_f64;
    for (i, j) in planes(rule.dim) {
        let g = dij_handle(f, r, i, j, DEFAULT_DERIVATIVE_STEP)?;
        let norms = plane_difference_norms(&g, ell, i, j, &thetas, p, rule, &opts)?;
        for (n, th) in norms.iter().zip(&thetas) {
            sup = sup.max(n / th.powf(alpha));
        }
    }
    Ok(base + sup)
}

/// [`lipschitz_norm_sphere`] on the grids `θ = m/2^k`, one value per `k` in
/// `ks`. The grids are nested, so the differences are taken once on the finest.
pub fn lipschitz_norm_sphere_dyadic(
    f: &FnHandle,
    r: usize,
    alpha: f64,
    ell: usize,
    p: f64,
    rule: &SphereRule,
    ks: &[usize],
) -> Result<Vec<f64>> {
    check_lip(alpha, ell, ks)?;
    let opts = SupOptions::default();
    let base = lp_norm_sphere_opts(f, p, rule, &opts)?;
    let kmax = ks.iter().copied().max().unwrap_or(0);
    let thetas = ThetaGrid { steps: 1 << kmax }.angles(1.0);
    let mut scaled = vec![0.0_f64; thetas.len()];
    for (i, j) in planes(rule.dim) {
        let g = dij_handle(f, r, i, j, DEFAULT_DERIVATIVE_STEP)?;
        let norms = plane_difference_norms(&g, ell, i, j, &thetas, p, rule, &opts)?;
        for ((s, n), th) in scaled.iter_mut().zip(&norms).zip(&thetas) {
            *s = s.max(n / th.powf(alpha));
        }
    }
    Ok(nested_grid_sups(&scaled, kmax, ks).into_iter().map(|s| base + s).collect())
}

pub(crate) fn check_lip(alpha: f64, ell: usize, ks: &[usize]) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) || ell == 0 {
        return Err(Error::usage(format!("need 0 ≤ α < 1 and ℓ ≥ 1, got α = {alpha}, ℓ = {ell}")));
    }
    if ks.is_empty() || ks.iter().any(|k| *k > 16) {
        return Err(Error::usage("dyadic levels must be given and at most 16"));
    }
    Ok(())
}

/// `scaled[m−1]` belongs to `θ = m/2^{kmax}`; returns for each `k` the max
/// over the sub-grid `θ = m/2^k`.
pub(crate) fn nested_grid_sups(scaled: &[f64], kmax: usize, ks: &[usize]) -> Vec<f64> {
    ks.iter()
        .map(|&k| {
            let stride = 1usize << (kmax - k);
            scaled.iter().skip(stride - 1).step_by(stride).fold(0.0, |a: f64, b| a.max(*b))
        })
        .collect()
}

/// [`hnorm_sphere`] for every `K = 0..=kmax` from a single modulus profile.
pub fn hnorm_sphere_dyadic(
    f: &FnHandle,
    r: usize,
    alpha: f64,
    ell: usize,
    p: f64,
    rule: &SphereRule,
    kmax: usize,
) -> Result<Vec<f64>> {
    check_lip(alpha, ell, &[kmax])?;
    let base = lp_norm_sphere_opts(f, p, rule, &SupOptions::default())?;
    let ts: Vec<f64> = (0..=kmax).map(|k| 0.5_f64.powi(k as i32)).collect();
    let w = modulus_sphere_profile(f, r + ell, &ts, p, rule, &ThetaGrid::default())?;
    Ok(prefix_sups(&w, &ts, r as f64 + alpha).into_iter().map(|s| base + s).collect())
}

/// `max_{j≤k} w_j / t_j^s` for each `k`.
pub(crate) fn prefix_sups(w: &[f64], ts: &[f64], s: f64) -> Vec<f64> {
    let mut run = 0.0_f64;
    w.iter().zip(ts).map(|(w, t)| {
        run = run.max(w / t.powf(s));
        run
    }).collect()
}

/// `‖f‖_p + max_{0≤k≤K} ω_{r+ℓ}(f, 2^{−k})_p / 2^{−k(r+α)}`.
pub fn hnorm_sphere(
    f: &FnHandle,
    r: usize,
    alpha: f64,
    ell: usize,
    p: f64,
    rule: &SphereRule,
    dyadic_k: usize,
) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) || ell == 0 {
        return Err(Error::usage(format!("need 0 ≤ α < 1 and ℓ ≥ 1, got α = {alpha}, ℓ = {ell}")));
    }
    Ok(*hnorm_sphere_dyadic(f, r, alpha, ell, p, rule, dyadic_k)?.last().expect("k = 0 is always present"))
}

/// `‖D^r_{i,j}(f − V_n f)‖_2`.
pub fn simultaneous_residual_l2(
    f: &FnHandle,
    spec: &ZonalSpec,
    r: usize,
    i: usize,
    j: usize,
    rule: &SphereRule,
) -> Result<f64> {
    check_plane(rule.dim, i, j)?;
    let lmax = rule.exactness / 2;
    let a = spec.coefficients();
    if lmax >= a.len() && S2Spectrum::supports(rule, lmax) {
        let s = S2Spectrum::analyze_in_plane(f, i, j, rule, lmax)?.dphi_pow(r);
        let keep: Vec<f64> = (0..=lmax).map(|k| 1.0 - a.get(k).copied().unwrap_or(0.0)).collect();
        return Ok(s.multiplier(&keep).degree_norms_sq().iter().sum::<f64>().sqrt());
    }
    let df = dij_handle(f, r, i, j, DEFAULT_DERIVATIVE_STEP)?;
    let dv = vn_dij_with(f, spec, r, i, j, rule, Backend::Kernel)?;
    let a = values_on(&df, &rule.points)?;
    let b = values_on(&dv, &rule.points)?;
    let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    Ok(lp_from_values(&diff, &rule.weights, 2.0))
}

/// `Z_k(⟨x, y⟩)` for two points; convenience for reproducing-kernel checks.
pub fn zonal_kernel(k: usize, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(x.len(), y.len())?;
    let lam = GegenbauerParam::for_sphere_dim(x.len())?;
    Ok(zonal_raw(k, lam.lambda(), dot(x, y).clamp(-1.0, 1.0)))
}

/// Domain tag for `S^{d-1}`.
pub fn sphere_domain(d: usize) -> Domain {
    Domain::Sphere(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{laplace_beltrami_poly, monomials_up_to};
    use crate::sphere::sphere_rule;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn poly3(f: impl Fn(&[MultiPoly]) -> MultiPoly) -> FnHandle {
        let v: Vec<MultiPoly> = (0..3).map(|i| MultiPoly::var(3, i)).collect();
        FnHandle::from_poly(Domain::Sphere(3), "p", f(&v)).unwrap()
    }

    fn max_gap(f: &FnHandle, g: &FnHandle, pts: &[Vec<f64>]) -> f64 {
        pts.iter().map(|x| (f.call(x) - g.call(x)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn spec_kernel_degree_and_reproduction_of_constants() {
        let s = ZonalSpec::new(4, 3).unwrap();
        assert!(s.kernel_degree() <= 8);
        assert_eq!(s.coefficients()[..5], [1.0; 5]);
        let rule = sphere_rule(3, 12).unwrap();
        let one = FnHandle::constant(Domain::Sphere(3), 1.0);
        for b in [Backend::Kernel, Backend::Spectral] {
            let v = vn_apply_with(&one, &s, &rule, b).unwrap();
            assert_abs_diff_eq!(v.call(&[0.0, 0.6, 0.8]), 1.0, epsilon = 1e-12);
        }
        assert_eq!(ZonalSpec::new(0, 3).unwrap().coefficients(), vec![1.0]);
    }

    #[test]
    fn projection_examples() {
        let rule = sphere_rule(3, 8).unwrap();
        let f = poly3(|v| &v[0] * &v[1]);
        let p2 = project_degree(&f, 2, &rule).unwrap();
        let p1 = project_degree(&f, 1, &rule).unwrap();
        for x in rule.points.iter().step_by(5) {
            assert_abs_diff_eq!(p2.call(x), x[0] * x[1], epsilon = 1e-9);
            assert_abs_diff_eq!(p1.call(x), 0.0, epsilon = 1e-9);
        }
        let one = FnHandle::constant(Domain::Sphere(3), 1.0);
        assert_abs_diff_eq!(project_degree(&one, 0, &rule).unwrap().call(&[1.0, 0.0, 0.0]), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn kernel_and_spectral_backends_agree() {
        let rule = sphere_rule(3, 20).unwrap();
        let f = FnHandle::new(Domain::Sphere(3), "exp", |x| (x[0] - 0.3 * x[2]).exp());
        let s = ZonalSpec::new(4, 3).unwrap();
        let a = vn_apply_with(&f, &s, &rule, Backend::Kernel).unwrap();
        let b = vn_apply_with(&f, &s, &rule, Backend::Spectral).unwrap();
        assert!(max_gap(&a, &b, &rule.points[..200]) < 1e-11);
        let da = vn_dij_with(&f, &s, 2, 0, 2, &rule, Backend::Kernel).unwrap();
        let db = vn_dij_with(&f, &s, 2, 0, 2, &rule, Backend::Spectral).unwrap();
        assert!(max_gap(&da, &db, &rule.points[..200]) < 1e-5);
    }

    #[test]
    fn jets_match_polynomial_derivatives() {
        let rule = sphere_rule(3, 14).unwrap();
        let f = poly3(|v| &(&v[0] * &v[1].pow(2)) + &v[2].pow(3));
        let s = ZonalSpec::new(3, 3).unwrap();
        for r in 1..=3 {
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                let dv = vn_dij_with(&f, &s, r, i, j, &rule, Backend::Kernel).unwrap();
                let exact = FnHandle::from_poly(
                    Domain::Sphere(3),
                    "d",
                    dij_pow_poly(f.poly().unwrap(), i, j, r as u32).unwrap(),
                )
                .unwrap();
                assert!(max_gap(&dv, &exact, &rule.points[..60]) < 1e-9, "r={r} ({i},{j})");
            }
        }
    }

    #[test]
    fn exact_projection_is_harmonic_and_matches_quadrature() {
        let rule = sphere_rule(3, 16).unwrap();
        for m in monomials_up_to(3, 4) {
            let deg = m.degree() as usize;
            for k in 0..=deg {
                let q = project_degree_poly(&m, k).unwrap();
                assert!(q.laplacian().max_abs_coeff() < 1e-10);
                let lb = laplace_beltrami_poly(&q).unwrap();
                let kk = (k * (k + 1)) as f64;
                assert!((&lb + &q.scale(kk)).max_abs_coeff() < 1e-10);
                let h = FnHandle::from_poly(Domain::Sphere(3), "m", m.clone()).unwrap();
                let num = project_degree(&h, k, &rule).unwrap();
                let qh = FnHandle::from_poly(Domain::Sphere(3), "q", q).unwrap();
                assert!(max_gap(&num, &qh, &rule.points[..40]) < 1e-11);
            }
        }
    }

    #[test]
    fn sphere_moments_in_two_and_four_dimensions() {
        assert_abs_diff_eq!(sphere_moment(&[2, 0]), PI, epsilon = 1e-13);
        assert_abs_diff_eq!(sphere_moment(&[0, 0, 0, 0]), 2.0 * PI * PI, epsilon = 1e-12);
        assert_eq!(sphere_moment(&[1, 2, 0]), 0.0);
        let rule = sphere_rule(4, 6).unwrap();
        let q = rule.integrate(&FnHandle::new(Domain::Sphere(4), "m", |x| x[0].powi(2) * x[3].powi(4))).unwrap();
        assert_abs_diff_eq!(q, sphere_moment(&[2, 0, 0, 4]), epsilon = 1e-12);
    }

    #[test]
    fn best_l2_error_examples_and_parseval() {
        let rule = sphere_rule(3, 20).unwrap();
        let f = poly3(|v| v[0].pow(2));
        assert_abs_diff_eq!(best_l2_error(&f, 1, &rule, 4).unwrap(), (16.0 * PI / 45.0).sqrt(), epsilon = 1e-10);
        assert!(best_l2_error(&f, 3, &rule, 4).unwrap() < 1e-7);
        let g = poly3(|v| &v[0] * &v[1]);
        assert!(best_l2_error(&g, 3, &rule, 6).unwrap() < 1e-7);
        for b in [Backend::Kernel, Backend::Spectral] {
            let e = HarmonicExpansion::with_backend(&f, 6, &rule, b).unwrap();
            assert!((e.parseval_sum() / e.total_norm_sq() - 1.0).abs() < 1e-8);
            assert!(e.tail_defect().abs() < 1e-8);
        }
    }

    #[test]
    fn best_l2_error_on_the_circle() {
        // cos(3φ) has E_3 = ‖cos 3φ‖ = √π.
        let rule = sphere_rule(2, 24).unwrap();
        let f = FnHandle::new(Domain::Sphere(2), "cos3", |x| x[0].powi(3) * 4.0 - 3.0 * x[0]);
        assert_abs_diff_eq!(best_l2_error(&f, 3, &rule, 6).unwrap(), PI.sqrt(), epsilon = 1e-10);
        assert!(best_l2_error(&f, 4, &rule, 6).unwrap() < 1e-7);
    }

    #[test]
    fn en_upper_examples() {
        let rule = sphere_rule(3, 24).unwrap();
        let f = poly3(|v| &(&v[0] * &v[1]) - &v[2]);
        assert!(en_upper(&f, 2, 2.0, &rule).unwrap().upper < 1e-8);
        assert!(en_upper(&f, 2, f64::INFINITY, &rule).unwrap().upper < 1e-8);
        let g = poly3(|v| &(&v[0] * &v[1]) * &v[2]);
        let b = en_upper(&g, 2, 2.0, &rule).unwrap();
        // V_2 g has degree ≤ 4, so the distance cannot beat E_5 = 0 but is
        // bounded by ‖g‖ = E_3; the multiplier on degree 3 is 1 − η(3/2) = 1/2.
        let e3 = b.best_l2.unwrap();
        assert_abs_diff_eq!(b.upper, 0.5 * best_l2_error(&g, 3, &rule, 4).unwrap(), epsilon = 1e-10);
        assert!(b.upper <= e3 * 2.0);
    }

    #[test]
    fn modulus_examples() {
        let rule = sphere_rule(3, 24).unwrap();
        let c = FnHandle::constant(Domain::Sphere(3), 2.0);
        let g = ThetaGrid::default();
        assert!(modulus_sphere(&c, 2, 0.5, 2.0, &rule, &g).unwrap() < 1e-12);
        assert!(modulus_sphere(&c, 1, 0.5, f64::INFINITY, &rule, &g).unwrap() < 1e-12);
        let x1 = poly3(|v| v[0].clone());
        for t in [0.1, 0.4] {
            let w = modulus_sphere(&x1, 1, t, f64::INFINITY, &rule, &g).unwrap();
            assert_abs_diff_eq!(w, 2.0 * (t / 2.0).sin(), epsilon = 1e-6);
        }
        let ts = [0.05, 0.1, 0.2, 0.4, 0.8];
        let prof = modulus_sphere_profile(&x1, 2, &ts, 2.0, &rule, &g).unwrap();
        assert!(prof.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn spectral_and_nodal_difference_norms_agree() {
        let rule = sphere_rule(3, 30).unwrap();
        let f = poly3(|v| &(&v[0].pow(3) * &v[1]) + &v[2].pow(2));
        let th = [0.1, 0.7];
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let a = plane_difference_norms(&f, 2, i, j, &th, 2.0, &rule, &SupOptions::default()).unwrap();
            let o = SupOptions::default();
            let b = nodal_difference_norms(&f, 2, i, j, &th, 2.0, &rule, &o).unwrap();
            let c = nodal_difference_norms(&f, 2, i, j, &th, 3.0, &rule, &o).unwrap();
            for k in 0..2 {
                assert_abs_diff_eq!(a[k], b[k], epsilon = 1e-10);
                assert!(c[k] * (4.0 * PI).powf(1.0 / 6.0) >= b[k] - 1e-12);
            }
        }
    }

    #[test]
    fn kfunc_examples() {
        let rule = sphere_rule(3, 24).unwrap();
        let f = poly3(|v| &v[0] * &v[2]);
        let r = 1;
        let k = kfunc_sphere_upper(&f, r, 0.25, 2.0, &rule, &[2, 4]).unwrap();
        let dmax = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(i, j)| lp_norm_sphere_opts(&dij_handle(&f, 1, i, j, 1e-3).unwrap(), 2.0, &rule, &SupOptions::default()).unwrap())
            .fold(0.0, f64::max);
        assert!(k.value <= 0.25 * dmax + 1e-9);
        let k0 = kfunc_sphere_upper(&f, r, 0.0, 2.0, &rule, &[2, 4]).unwrap();
        assert!(k0.value < 1e-9);
    }

    #[test]
    fn fractional_laplacian_examples() {
        let rule = sphere_rule(3, 16).unwrap();
        let x1 = poly3(|v| v[0].clone());
        let h = frac_laplacian_l2(&x1, 0.5, 6, &rule).unwrap();
        let y = frac_laplacian_l2(&poly3(|v| &v[0] * &v[1]), 1.0, 6, &rule).unwrap();
        for x in rule.points.iter().step_by(11) {
            assert_abs_diff_eq!(h.call(x), 2f64.sqrt() * x[0], epsilon = 1e-10);
            assert_abs_diff_eq!(y.call(x), 6.0 * x[0] * x[1], epsilon = 1e-10);
        }
        let c = frac_laplacian_l2(&FnHandle::constant(Domain::Sphere(3), 3.0), 1.0, 6, &rule).unwrap();
        assert_abs_diff_eq!(c.call(&[0.0, 0.0, 1.0]), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sobolev_norm_examples() {
        let rule = sphere_rule(3, 20).unwrap();
        let x1 = poly3(|v| v[0].clone());
        assert_abs_diff_eq!(sobolev_norm_sphere(&x1, 1, f64::INFINITY, &rule, 1e-3).unwrap(), 3.0, epsilon = 1e-6);
        let c = FnHandle::constant(Domain::Sphere(3), -2.0);
        assert_abs_diff_eq!(sobolev_norm_sphere(&c, 2, 2.0, &rule, 1e-3).unwrap(), 2.0 * (4.0 * PI).sqrt(), epsilon = 1e-10);
        let p = poly3(|v| &(&v[0] * &v[1]) + &v[2].pow(3));
        let q = FnHandle::new(Domain::Sphere(3), "numeric", |x| x[0] * x[1] + x[2].powi(3));
        for r in 1..=2 {
            let a = sobolev_norm_sphere(&p, r, 2.0, &rule, 1e-2).unwrap();
            let b = sobolev_norm_sphere(&q, r, 2.0, &rule, 1e-2).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-6);
        }
    }

    #[test]
    fn lipschitz_and_h_norms() {
        let rule = sphere_rule(3, 24).unwrap();
        let c = FnHandle::constant(Domain::Sphere(3), 1.0);
        let base = (4.0 * PI).sqrt();
        assert_abs_diff_eq!(lipschitz_norm_sphere(&c, 1, 0.5, 1, 2.0, &rule, &ThetaGrid::default()).unwrap(), base, epsilon = 1e-10);
        assert_abs_diff_eq!(hnorm_sphere(&c, 1, 0.5, 1, 2.0, &rule, 6).unwrap(), base, epsilon = 1e-10);
        let f = poly3(|v| &v[0] * &v[1]);
        let l0 = lipschitz_norm_sphere(&f, 1, 0.0, 1, 2.0, &rule, &ThetaGrid::default()).unwrap();
        let l5 = lipschitz_norm_sphere(&f, 1, 0.5, 1, 2.0, &rule, &ThetaGrid::default()).unwrap();
        assert!(l0.is_finite() && l5 >= l0);
        let h = hnorm_sphere(&f, 1, 0.9, 1, 2.0, &rule, 8).unwrap();
        assert!(h.is_finite());
    }

    #[test]
    fn simultaneous_residual_routes_agree() {
        let f = FnHandle::new(Domain::Sphere(3), "exp", |x| (0.5 * x[0] + x[1] * x[2]).exp());
        let spec = ZonalSpec::new(3, 3).unwrap();
        let rule = sphere_rule(3, 40).unwrap();
        let a = simultaneous_residual_l2(&f, &spec, 1, 0, 2, &rule).unwrap();
        let df = dij_handle(&f, 1, 0, 2, 2e-3).unwrap();
        let dv = vn_dij_with(&f, &spec, 1, 0, 2, &rule, Backend::Kernel).unwrap();
        let b = lp_norm_sphere_opts(&df.sub(&dv).unwrap(), 2.0, &rule, &SupOptions::grid_only()).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-7 * b.max(1.0));
        assert!(a > 0.0);
    }

    #[test]
    fn jets_for_first_orders() {
        assert_eq!(dij_jets(1), vec![Jet { a: 1, b: 1, c: 0, coef: 1.0 }]);
        // D²K = K''v² − K'w.
        let j2 = dij_jets(2);
        assert!(j2.contains(&Jet { a: 2, b: 2, c: 0, coef: 1.0 }));
        assert!(j2.contains(&Jet { a: 1, b: 0, c: 1, coef: -1.0 }));
    }

    #[test]
    fn zonal_kernel_matches_eval() {
        let x = [0.6, 0.8, 0.0];
        let y = [0.0, 0.6, 0.8];
        assert_abs_diff_eq!(zonal_kernel(3, &x, &y).unwrap(), zonal_eval(3, 3, 0.48).unwrap(), epsilon = 1e-14);
        assert_eq!(sphere_domain(3), Domain::Sphere(3));
    }
}

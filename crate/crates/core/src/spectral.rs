//! Separable real spherical-harmonic transform on the ring rules of `S^2`.
//!
//! Coefficients are taken against the orthonormal basis
//! `p̄_l^m(z)·{1/√(2π)}` (m = 0) and `p̄_l^m(z)·{cos mφ, sin mφ}/√π` (m > 0),
//! where `p̄_l^m` is orthonormal on `[-1, 1]`. The transform computes the same
//! quadrature sums as the zonal-kernel route, factored ring by ring.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::func::FnHandle;
use crate::sphere::{values_on, RuleLayout, SphereRule};

#[inline]
pub(crate) fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Fills `out[tri(l, m)] = p̄_l^m(z)` for `m ≤ l ≤ lmax`.
pub(crate) fn legendre_normalized(lmax: usize, z: f64, out: &mut [f64]) {
    let s = (1.0 - z * z).max(0.0).sqrt();
    let mut pmm = std::f64::consts::FRAC_1_SQRT_2;
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= s * ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
        }
        out[tri(m, m)] = pmm;
        if m < lmax {
            out[tri(m + 1, m)] = z * (2.0 * m as f64 + 3.0).sqrt() * pmm;
        }
        let m2 = (m * m) as f64;
        for l in m + 2..=lmax {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - m2)).sqrt();
            let lm1 = lf - 1.0;
            let b = ((lm1 * lm1 - m2) / (4.0 * lm1 * lm1 - 1.0)).sqrt();
            out[tri(l, m)] = a * (z * out[tri(l - 1, m)] - b * out[tri(l - 2, m)]);
        }
    }
}

fn azimuth_norm(m: usize) -> f64 {
    if m == 0 {
        1.0 / (2.0 * PI).sqrt()
    } else {
        1.0 / PI.sqrt()
    }
}

/// Real spherical-harmonic coefficients up to degree `lmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct S2Spectrum {
    lmax: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

struct Rings<'a> {
    z: &'a [f64],
    zw: &'a [f64],
    nphi: usize,
}

fn rings(rule: &SphereRule) -> Result<Rings<'_>> {
    match &rule.layout {
        RuleLayout::Rings { z, z_weights, nphi } => Ok(Rings { z, zw: z_weights, nphi: *nphi }),
        _ => Err(Error::usage("spectral transform needs an S^2 ring rule")),
    }
}

fn azimuths(nphi: usize) -> Vec<f64> {
    let dphi = 2.0 * PI / nphi as f64;
    (0..nphi).map(|k| dphi * (k as f64 + 0.5)).collect()
}

/// `table[m][k] = (cos mφ_k, sin mφ_k)`.
fn trig_table(lmax: usize, phis: &[f64]) -> Vec<Vec<(f64, f64)>> {
    (0..=lmax)
        .map(|m| phis.iter().map(|&p| ((m as f64 * p).cos(), (m as f64 * p).sin())).collect())
        .collect()
}

impl S2Spectrum {
    pub fn zeros(lmax: usize) -> Self {
        let n = tri(lmax, lmax) + 1;
        S2Spectrum { lmax, cos: vec![0.0; n], sin: vec![0.0; n] }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// Whether `rule` supports coefficients up to `lmax`.
    pub fn supports(rule: &SphereRule, lmax: usize) -> bool {
        matches!(rule.layout, RuleLayout::Rings { .. }) && lmax <= rule.exactness
    }

    /// Analysis of nodal values given in the rule's ring-major order.
    pub fn analyze(values: &[f64], rule: &SphereRule, lmax: usize) -> Result<Self> {
        let rg = rings(rule)?;
        if lmax > rule.exactness {
            return Err(Error::usage(format!(
                "degree {lmax} exceeds rule exactness {}",
                rule.exactness
            )));
        }
        if values.len() != rule.len() {
            return Err(Error::DimensionMismatch { expected: rule.len(), got: values.len() });
        }
        let phis = azimuths(rg.nphi);
        let trig = trig_table(lmax, &phis);
        let dphi = 2.0 * PI / rg.nphi as f64;
        let mut out = Self::zeros(lmax);
        let mut leg = vec![0.0; tri(lmax, lmax) + 1];
        let mut ac = vec![0.0; lmax + 1];
        let mut asn = vec![0.0; lmax + 1];
        for (a, (&z, &wz)) in rg.z.iter().zip(rg.zw).enumerate() {
            let row = &values[a * rg.nphi..(a + 1) * rg.nphi];
            for m in 0..=lmax {
                let (mut c, mut s) = (0.0, 0.0);
                for (v, &(cm, sm)) in row.iter().zip(&trig[m]) {
                    c += v * cm;
                    s += v * sm;
                }
                let scale = wz * dphi * azimuth_norm(m);
                ac[m] = c * scale;
                asn[m] = s * scale;
            }
            legendre_normalized(lmax, z, &mut leg);
            for l in 0..=lmax {
                for m in 0..=l {
                    let p = leg[tri(l, m)];
                    out.cos[tri(l, m)] += ac[m] * p;
                    if m > 0 {
                        out.sin[tri(l, m)] += asn[m] * p;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn analyze_fn(f: &FnHandle, rule: &SphereRule, lmax: usize) -> Result<Self> {
        let v = values_on(f, &rule.points)?;
        Self::analyze(&v, rule, lmax)
    }

    /// Spectrum of `g = f ∘ P` where `P` sends `e_1, e_2, e_3` to `e_i, e_j, e_k`;
    /// then `D_{i,j} f ∘ P = D_{1,2} g` and rotations in the `(i, j)` plane
    /// become azimuthal shifts of `g`.
    pub fn analyze_in_plane(f: &FnHandle, i: usize, j: usize, rule: &SphereRule, lmax: usize) -> Result<Self> {
        let perm = plane_frame(i, j)?;
        let pts: Vec<Vec<f64>> = rule.points.iter().map(|x| frame_apply(&perm, x)).collect();
        let v = values_on(f, &pts)?;
        Self::analyze(&v, rule, lmax)
    }

    /// Values at the rule's nodes.
    pub fn synthesize(&self, rule: &SphereRule) -> Result<Vec<f64>> {
        let rg = rings(rule)?;
        let lmax = self.lmax;
        let phis = azimuths(rg.nphi);
        let trig = trig_table(lmax, &phis);
        let mut leg = vec![0.0; tri(lmax, lmax) + 1];
        let mut out = vec![0.0; rule.len()];
        let mut bc = vec![0.0; lmax + 1];
        let mut bs = vec![0.0; lmax + 1];
        for (a, &z) in rg.z.iter().enumerate() {
            legendre_normalized(lmax, z, &mut leg);
            for m in 0..=lmax {
                let (mut c, mut s) = (0.0, 0.0);
                for l in m..=lmax {
                    let p = leg[tri(l, m)];
                    c += self.cos[tri(l, m)] * p;
                    s += self.sin[tri(l, m)] * p;
                }
                bc[m] = c * azimuth_norm(m);
                bs[m] = s * azimuth_norm(m);
            }
            let row = &mut out[a * rg.nphi..(a + 1) * rg.nphi];
            for (k, v) in row.iter_mut().enumerate() {
                *v = (0..=lmax).map(|m| bc[m] * trig[m][k].0 + bs[m] * trig[m][k].1).sum();
            }
        }
        Ok(out)
    }

    /// Value at an arbitrary point of `S^2`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let lmax = self.lmax;
        let z = x[2].clamp(-1.0, 1.0);
        let phi = x[1].atan2(x[0]);
        let mut leg = vec![0.0; tri(lmax, lmax) + 1];
        legendre_normalized(lmax, z, &mut leg);
        let mut acc = 0.0;
        for m in 0..=lmax {
            let (sm, cm) = (m as f64 * phi).sin_cos();
            let (mut c, mut s) = (0.0, 0.0);
            for l in m..=lmax {
                let p = leg[tri(l, m)];
                c += self.cos[tri(l, m)] * p;
                s += self.sin[tri(l, m)] * p;
            }
            acc += azimuth_norm(m) * (c * cm + s * sm);
        }
        acc
    }

    /// `‖proj_l f‖²_2` for each degree `l`.
    pub fn degree_norms_sq(&self) -> Vec<f64> {
        (0..=self.lmax)
            .map(|l| (0..=l).map(|m| self.cos[tri(l, m)].powi(2) + self.sin[tri(l, m)].powi(2)).sum())
            .collect()
    }

    /// Scales degree `l` by `a[l]` (missing entries are zero).
    pub fn multiplier(&self, a: &[f64]) -> Self {
        let mut out = self.clone();
        for l in 0..=self.lmax {
            let s = a.get(l).copied().unwrap_or(0.0);
            for m in 0..=l {
                out.cos[tri(l, m)] *= s;
                out.sin[tri(l, m)] *= s;
            }
        }
        out
    }

    /// `D_{1,2}^r = (−∂_φ)^r` acting on the coefficients.
    pub fn dphi_pow(&self, r: usize) -> Self {
        let mut out = self.clone();
        for _ in 0..r {
            for l in 0..=self.lmax {
                for m in 0..=l {
                    let k = tri(l, m);
                    let (c, s) = (out.cos[k], out.sin[k]);
                    out.cos[k] = -(m as f64) * s;
                    out.sin[k] = m as f64 * c;
                }
            }
        }
        out
    }

    /// `(1 − e^{imθ})^r` summed in norm: `‖Δ^r_{1,2,θ} f‖²_2` of the expansion.
    pub fn azimuthal_difference_norm_sq(&self, r: usize, theta: f64) -> f64 {
        let mut acc = 0.0;
        for l in 0..=self.lmax {
            for m in 1..=l {
                let amp = (2.0 * (m as f64 * theta / 2.0).sin()).abs().powi(2 * r as i32);
                acc += amp * (self.cos[tri(l, m)].powi(2) + self.sin[tri(l, m)].powi(2));
            }
        }
        acc
    }
}

/// Coordinates `(i, j, k)` forming the frame used by [`S2Spectrum::analyze_in_plane`].
pub(crate) fn plane_frame(i: usize, j: usize) -> Result<[usize; 3]> {
    if i == j || i > 2 || j > 2 {
        return Err(Error::usage(format!("invalid plane ({i}, {j}) on S^2")));
    }
    Ok([i, j, 3 - i - j])
}

/// `P x` with `(P x)[frame[a]] = x[a]`.
pub(crate) fn frame_apply(frame: &[usize; 3], x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; 3];
    for a in 0..3 {
        y[frame[a]] = x[a];
    }
    y
}

/// `P^{-1} y`.
pub(crate) fn frame_inverse(frame: &[usize; 3], y: &[f64]) -> Vec<f64> {
    (0..3).map(|a| y[frame[a]]).collect()
}

use serde::Serialize;
use sphereball::ball_approx::{
    kfunc_ball_candidates_plain, kfunc_ball_from_candidates, modulus_ball_profile, BallRules,
};
use sphereball::sphere::{sphere_rule, SphereRule};
use sphereball::sphere_approx::{
    dij_handle, hnorm_sphere_dyadic, kfunc_from_candidates, kfunc_sphere_candidates, lipschitz_norm_sphere_dyadic,
    modulus_sphere_profile, simultaneous_residual_l2, HarmonicExpansion, ThetaGrid, ZonalSpec,
    DEFAULT_DERIVATIVE_STEP,
};
use sphereball::Domain;

use super::{resolution, band_cases, check_ns, guard, p_label, planes, scan_cases, Prepared, ScanPoint, TrendCriteria};
use crate::config::Params;
use crate::corpus::{select, CorpusEntry, NAMES};
use crate::error::{Result, VerifyError};
use crate::report::Case;

/// Best `L²` error over `Π_n` (degrees `0..=n`).
pub(super) fn best_upto(h: &HarmonicExpansion, n: usize) -> sphereball::Result<f64> {
    h.best_l2_error(n + 1)
}

/// Settings shared by the Jackson and inverse scans.
#[derive(Serialize)]
struct Scan {
    exactness: usize,
    ns: Vec<usize>,
    r: usize,
    p: f64,
    theta_steps: usize,
    corpus: Vec<String>,
    max_slope: f64,
    max_spread: f64,
    zero_tol: f64,
}

fn scan_settings(p: &mut Params) -> Result<Scan> {
    let s = Scan {
        exactness: p.usize("exactness", 256)?,
        ns: p.usizes("ns", &[4, 8, 16, 32])?,
        r: p.usize("r", 3)?,
        p: 2.0,
        theta_steps: p.usize("theta_steps", 16)?,
        corpus: p.strings("corpus", &NAMES)?,
        max_slope: p.positive("max_slope", 0.2)?,
        max_spread: p.positive("max_spread", 4.0)?,
        zero_tol: p.positive("zero_tol", 1e-10)?,
    };
    check_ns(&s.ns, "ns")?;
    if s.r == 0 || s.theta_steps == 0 {
        return Err(VerifyError::config("`r` and `theta_steps` must be positive"));
    }
    let top = *s.ns.iter().max().expect("non-empty");
    if 2 * (top + 2) > s.exactness {
        return Err(VerifyError::config(format!("exactness {} cannot resolve degree {}", s.exactness, top + 1)));
    }
    select(Domain::Sphere(3), &s.corpus)?;
    Ok(s)
}

struct ScanData {
    /// `‖f‖_2`.
    norm: f64,
    /// Best errors over `Π_n`, `n = 0..=max(ns)`.
    best: Vec<f64>,
    /// `ω_r(f, 1/n)_2` for each `n` of the scan.
    omega: Vec<f64>,
}

fn scan_data(e: &CorpusEntry, s: &Scan, rule: &SphereRule) -> sphereball::Result<ScanData> {
    let top = *s.ns.iter().max().expect("non-empty");
    let h = HarmonicExpansion::new(&e.handle, top + 1, rule)?;
    let best = (0..=top).map(|n| best_upto(&h, n)).collect::<sphereball::Result<_>>()?;
    let ts: Vec<f64> = s.ns.iter().map(|n| 1.0 / *n as f64).collect();
    let grid = ThetaGrid { steps: s.theta_steps };
    let omega = modulus_sphere_profile(&e.handle, s.r, &ts, 2.0, rule, &grid)?;
    Ok(ScanData { norm: h.total_norm_sq().sqrt(), best, omega })
}

/// `n^{−r} Σ_{k=1}^n k^{r−1} b_k`.
pub(super) fn inverse_sum(n: usize, r: usize, b: impl Fn(usize) -> f64) -> f64 {
    let s: f64 = (1..=n).map(|k| (k as f64).powi(r as i32 - 1) * b(k)).sum();
    s / (n as f64).powi(r as i32)
}

fn scan_suite(p: &mut Params, inverse: bool) -> Result<Prepared> {
    let s = scan_settings(p)?;
    Ok(Prepared::new(resolution(&s), move |_| {
        let crit = TrendCriteria { max_slope: s.max_slope, max_spread: Some(s.max_spread), two_sided: true };
        let entries = select(Domain::Sphere(3), &s.corpus).expect("validated");
        let rule = match sphere_rule(3, s.exactness) {
            Ok(r) => r,
            Err(e) => return vec![Case::failed("rule", e)],
        };
        let mut out = Vec::new();
        for e in &entries {
            out.extend(guard(&e.name, || {
                let data = scan_data(e, &s, &rule)?;
                let points: Vec<ScanPoint> = s
                    .ns
                    .iter()
                    .zip(&data.omega)
                    .map(|(&n, &w)| {
                        if inverse {
                            ScanPoint { x: n as f64, lhs: w, rhs: inverse_sum(n, s.r, |k| data.best[k - 1]) }
                        } else {
                            ScanPoint { x: n as f64, lhs: data.best[n], rhs: w }
                        }
                    })
                    .collect();
                Ok(scan_cases(&e.name, "n", &points, s.zero_tol * data.norm, &crit))
            }));
        }
        out
    }))
}

pub(super) fn jackson(p: &mut Params) -> Result<Prepared> {
    scan_suite(p, false)
}

pub(super) fn inverse(p: &mut Params) -> Result<Prepared> {
    scan_suite(p, true)
}

#[derive(Serialize)]
struct Kmod {
    exactness: usize,
    r: Vec<usize>,
    p: Vec<f64>,
    dyadic: Vec<usize>,
    degrees: Vec<usize>,
    theta_steps: usize,
    corpus: Vec<String>,
    ball_mu: Vec<f64>,
    ball_exactness: usize,
    max_slope: f64,
    zero_tol: f64,
}

pub(super) fn kmod(p: &mut Params) -> Result<Prepared> {
    let s = Kmod {
        exactness: p.usize("exactness", 128)?,
        r: p.usizes("r", &[1, 2])?,
        p: p.exponents("p", &[2.0])?,
        dyadic: p.usizes("dyadic", &[1, 2, 3, 4, 5])?,
        degrees: p.usizes("degrees", &[1, 2, 4, 8, 16, 32])?,
        theta_steps: p.usize("theta_steps", 16)?,
        corpus: p.strings("corpus", &NAMES)?,
        ball_mu: p.f64s("ball_mu", &[0.0])?,
        ball_exactness: p.usize("ball_exactness", 128)?,
        max_slope: p.positive("max_slope", 0.2)?,
        zero_tol: p.positive("zero_tol", 1e-10)?,
    };
    check_ns(&s.degrees, "degrees")?;
    check_ns(&s.r, "r")?;
    select(Domain::Sphere(3), &s.corpus)?;
    Ok(Prepared::new(resolution(&s), move |_| {
        let ts: Vec<f64> = s.dyadic.iter().map(|k| 0.5f64.powi(*k as i32)).collect();
        let grid = ThetaGrid { steps: s.theta_steps };
        let mut out = Vec::new();
        let sphere = select(Domain::Sphere(3), &s.corpus).expect("validated");
        out.extend(guard("sphere", || {
            let rule = sphere_rule(3, s.exactness)?;
            let mut cases = Vec::new();
            for e in &sphere {
                for &p in &s.p {
                    for &r in &s.r {
                        let name = format!("sphere/{}/r={r}/p={}", e.name, p_label(p));
                        cases.extend(guard(&name, || {
                            let w = modulus_sphere_profile(&e.handle, r, &ts, p, &rule, &grid)?;
                            let cands = kfunc_sphere_candidates(&e.handle, r, p, &rule, &s.degrees)?;
                            let mut pts = Vec::new();
                            for (t, w) in ts.iter().zip(&w) {
                                let k = kfunc_from_candidates(&cands, r, *t)?;
                                pts.push(ScanPoint { x: *t, lhs: *w, rhs: k.value });
                            }
                            Ok(band_cases(&name, "t", &pts, s.zero_tol, s.max_slope))
                        }));
                    }
                }
            }
            Ok(cases)
        }));
        for &mu in &s.ball_mu {
            out.extend(guard(&format!("ball/mu={mu}"), || {
                let rules = BallRules::new(2, mu, s.ball_exactness)?;
                let entries = select(Domain::Ball(2), &s.corpus).expect("validated");
                let mut cases = Vec::new();
                for e in &entries {
                    for &p in &s.p {
                        for &r in &s.r {
                            let name = format!("ball/mu={mu}/{}/r={r}/p={}", e.name, p_label(p));
                            cases.extend(guard(&name, || {
                                let w = modulus_ball_profile(&e.handle, r, &ts, p, &rules, &grid)?;
                                let cands = kfunc_ball_candidates_plain(&e.handle, r, p, &rules, &s.degrees)?;
                                let mut pts = Vec::new();
                                for (t, w) in ts.iter().zip(&w) {
                                    let k = kfunc_ball_from_candidates(&cands, r, *t)?;
                                    pts.push(ScanPoint { x: *t, lhs: *w, rhs: k.value });
                                }
                                Ok(band_cases(&name, "t", &pts, s.zero_tol, s.max_slope))
                            }));
                        }
                    }
                }
                Ok(cases)
            }));
        }
        out
    }))
}

#[derive(Serialize)]
struct Simul {
    exactness: usize,
    ns: Vec<usize>,
    r: Vec<usize>,
    corpus: Vec<String>,
    max_slope: f64,
    zero_tol: f64,
}

pub(super) const SMOOTH: [&str; 4] = ["poly3", "poly6", "poly12", "bump"];

pub(super) fn simul(p: &mut Params) -> Result<Prepared> {
    let s = Simul {
        exactness: p.usize("exactness", 128)?,
        ns: p.usizes("ns", &[4, 8, 16])?,
        r: p.usizes("r", &[1, 2])?,
        corpus: p.strings("corpus", &SMOOTH)?,
        max_slope: p.positive("max_slope", 0.2)?,
        zero_tol: p.positive("zero_tol", 1e-10)?,
    };
    check_ns(&s.ns, "ns")?;
    check_ns(&s.r, "r")?;
    let top = *s.ns.iter().max().expect("non-empty");
    if 2 * top + 2 > s.exactness / 2 {
        return Err(VerifyError::config(format!("exactness {} cannot resolve V_n for n = {top}", s.exactness)));
    }
    select(Domain::Sphere(3), &s.corpus)?;
    Ok(Prepared::new(resolution(&s), move |_| {
        let crit = TrendCriteria { max_slope: s.max_slope, max_spread: None, two_sided: false };
        let entries = select(Domain::Sphere(3), &s.corpus).expect("validated");
        let rule = match sphere_rule(3, s.exactness) {
            Ok(r) => r,
            Err(e) => return vec![Case::failed("rule", e)],
        };
        let lmax = s.exactness / 2;
        let mut out = Vec::new();
        for e in &entries {
            for &r in &s.r {
                let name = format!("{}/r={r}", e.name);
                out.extend(guard(&name, || {
                    let fh = HarmonicExpansion::new(&e.handle, lmax, &rule)?;
                    let zero = s.zero_tol * fh.total_norm_sq().sqrt();
                    let derivs: Vec<HarmonicExpansion> = planes(3)
                        .into_iter()
                        .map(|(i, j)| {
                            let g = dij_handle(&e.handle, r, i, j, DEFAULT_DERIVATIVE_STEP)?;
                            HarmonicExpansion::new(&g, lmax, &rule)
                        })
                        .collect::<sphereball::Result<_>>()?;
                    let mut near = Vec::new();
                    let mut best = Vec::new();
                    for &n in &s.ns {
                        let spec = ZonalSpec::new(n, 3)?;
                        let mut worst = (f64::NEG_INFINITY, ScanPoint { x: n as f64, lhs: 0.0, rhs: 0.0 });
                        let mut max_en = 0.0_f64;
                        for ((i, j), h) in planes(3).into_iter().zip(&derivs) {
                            let res = simultaneous_residual_l2(&e.handle, &spec, r, i, j, &rule)?;
                            let en = best_upto(h, n)?;
                            max_en = max_en.max(en);
                            let ratio = if en > zero { res / en } else { 0.0 };
                            if ratio > worst.0 {
                                worst = (ratio, ScanPoint { x: n as f64, lhs: res, rhs: en });
                            }
                        }
                        near.push(worst.1);
                        let lhs = best_upto(&fh, 2 * n)?;
                        best.push(ScanPoint { x: n as f64, lhs, rhs: max_en / (n as f64).powi(r as i32) });
                    }
                    let mut cases = scan_cases(&format!("{name}/near_best"), "n", &near, zero, &crit);
                    cases.extend(scan_cases(&format!("{name}/e2n"), "n", &best, zero, &crit));
                    Ok(cases)
                }));
            }
        }
        out
    }))
}

#[derive(Serialize)]
pub(super) struct Lip {
    pub exactness: usize,
    pub r: usize,
    pub alpha: f64,
    pub ell: usize,
    pub p: Vec<f64>,
    pub dyadic: Vec<usize>,
    pub corpus: Vec<String>,
    pub mu: Vec<f64>,
    pub max_slope: f64,
}

impl Lip {
    pub fn top(&self) -> usize {
        self.dyadic.iter().copied().max().expect("non-empty")
    }

    /// Pairs the Lipschitz norm on the grid `m/2^k` with the H-norm truncated at `k`.
    pub fn points(&self, lip: &[f64], h: &[f64]) -> Vec<ScanPoint> {
        self.dyadic
            .iter()
            .zip(lip)
            .map(|(&k, &w)| ScanPoint { x: 0.5f64.powi(k as i32), lhs: w, rhs: h[k] })
            .collect()
    }
}

pub(super) fn lip_settings(p: &mut Params, exactness: usize, ball: bool) -> Result<Lip> {
    let s = Lip {
        exactness: p.usize("exactness", exactness)?,
        r: p.usize("r", 1)?,
        alpha: p.f64("alpha", 0.5)?,
        ell: p.usize("ell", 1)?,
        p: p.exponents("p", &[2.0])?,
        dyadic: p.usizes("dyadic", &[2, 3, 4, 5, 6])?,
        corpus: p.strings("corpus", &NAMES)?,
        mu: if ball { p.f64s("mu", &[0.0, 0.5])? } else { Vec::new() },
        max_slope: p.positive("max_slope", 0.2)?,
    };
    if !(0.0..1.0).contains(&s.alpha) || s.r == 0 || s.ell == 0 {
        return Err(VerifyError::config("need r ≥ 1, ℓ ≥ 1 and 0 ≤ α < 1"));
    }
    if s.dyadic.is_empty() || s.dyadic.iter().any(|k| *k > 10) {
        return Err(VerifyError::config("dyadic levels above 10 are not supported"));
    }
    select(if ball { Domain::Ball(2) } else { Domain::Sphere(3) }, &s.corpus)?;
    Ok(s)
}

pub(super) fn lip(p: &mut Params) -> Result<Prepared> {
    let s = lip_settings(p, 96, false)?;
    Ok(Prepared::new(resolution(&s), move |_| {
        let entries = select(Domain::Sphere(3), &s.corpus).expect("validated");
        let rule = match sphere_rule(3, s.exactness) {
            Ok(r) => r,
            Err(e) => return vec![Case::failed("rule", e)],
        };
        let mut out = Vec::new();
        for e in &entries {
            for &p in &s.p {
                let name = format!("{}/p={}", e.name, p_label(p));
                out.extend(guard(&name, || {
                    let w = lipschitz_norm_sphere_dyadic(&e.handle, s.r, s.alpha, s.ell, p, &rule, &s.dyadic)?;
                    let h = hnorm_sphere_dyadic(&e.handle, s.r, s.alpha, s.ell, p, &rule, s.top())?;
                    Ok(band_cases(&name, "t", &s.points(&w, &h), 0.0, s.max_slope))
                }));
            }
        }
        out
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_sum_of_constant_errors() {
        assert!((inverse_sum(4, 1, |_| 2.0) - 2.0).abs() < 1e-15);
        assert!((inverse_sum(2, 2, |_| 1.0) - 0.75).abs() < 1e-15);
    }
}

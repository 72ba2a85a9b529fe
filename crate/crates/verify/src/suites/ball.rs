use serde::Serialize;
use sphereball::ball::{ball_rule, lp_norm_ball, BallRule};
use sphereball::ball_approx::{
    hat_kfunc_ball_from_candidates, hnorm_ball_dyadic, kfunc_ball_candidates, kfunc_ball_from_candidates,
    lipschitz_norm_ball_dyadic, modulus_ball_profile, simultaneous_ball_scan, BallExpansion, BallKernelSpec, BallRules,
};
use sphereball::poly::{dii_sq_poly, dij_pow_poly, dmu_poly};
use sphereball::sphere_approx::ThetaGrid;
use sphereball::{Domain, MultiPoly};

use super::sphere::{inverse_sum, lip_settings, SMOOTH};
use super::{resolution, band_cases, check_ns, guard, p_label, planes, scan_cases, Prepared, ScanPoint, TrendCriteria};
use crate::config::Params;
use crate::corpus::{falpha as falpha_entry, select, NAMES};
use crate::error::{Result, VerifyError};
use crate::fit::ls_slope;
use crate::report::Case;

fn check_mu(mu: &[f64]) -> Result<()> {
    match mu.iter().find(|m| **m != 0.0 && **m != 0.5) {
        Some(m) => Err(VerifyError::config(format!("μ = {m} is not supported; use 0 or 0.5"))),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct Jackson {
    mu: Vec<f64>,
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

pub(super) fn jackson(p: &mut Params) -> Result<Prepared> {
    let s = Jackson {
        mu: p.f64s("mu", &[0.0])?,
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
    check_mu(&s.mu)?;
    check_ns(&s.ns, "ns")?;
    if s.r == 0 || s.theta_steps == 0 {
        return Err(VerifyError::config("`r` and `theta_steps` must be positive"));
    }
    let top = *s.ns.iter().max().expect("non-empty");
    if 2 * (top + 2) > s.exactness {
        return Err(VerifyError::config(format!("exactness {} cannot resolve degree {top}", s.exactness)));
    }
    select(Domain::Ball(2), &s.corpus)?;
    Ok(Prepared::new(resolution(&s), move |_| {
        let crit = TrendCriteria { max_slope: s.max_slope, max_spread: Some(s.max_spread), two_sided: true };
        let entries = select(Domain::Ball(2), &s.corpus).expect("validated");
        let ts: Vec<f64> = s.ns.iter().map(|n| 1.0 / *n as f64).collect();
        let grid = ThetaGrid { steps: s.theta_steps };
        let mut out = Vec::new();
        for &mu in &s.mu {
            out.extend(guard(&format!("mu={mu}"), || {
                let rules = BallRules::new(2, mu, s.exactness)?;
                let mut cases = Vec::new();
                for e in &entries {
                    let name = format!("mu={mu}/{}", e.name);
                    cases.extend(guard(&name, || {
                        let h = BallExpansion::new(&e.handle, top + 1, &rules)?;
                        let zero = s.zero_tol * h.total_norm_sq().sqrt();
                        let best: Vec<f64> = (0..=top).map(|n| h.best_l2_error(n)).collect::<sphereball::Result<_>>()?;
                        let w = modulus_ball_profile(&e.handle, s.r, &ts, 2.0, &rules, &grid)?;
                        let jack: Vec<ScanPoint> = s
                            .ns
                            .iter()
                            .zip(&w)
                            .map(|(&n, &w)| ScanPoint { x: n as f64, lhs: best[n], rhs: w })
                            .collect();
                        let inv: Vec<ScanPoint> = s
                            .ns
                            .iter()
                            .zip(&w)
                            .map(|(&n, &w)| ScanPoint { x: n as f64, lhs: w, rhs: inverse_sum(n, s.r, |k| best[k]) })
                            .collect();
                        let mut c = scan_cases(&format!("{name}/jackson"), "n", &jack, zero, &crit);
                        c.extend(scan_cases(&format!("{name}/inverse"), "n", &inv, zero, &crit));
                        Ok(c)
                    }));
                }
                Ok(cases)
            }));
        }
        out
    }))
}

#[derive(Serialize)]
struct BallKEquivalence {
    mu: Vec<f64>,
    exactness: usize,
    r: Vec<usize>,
    p: Vec<f64>,
    dyadic: Vec<usize>,
    degrees: Vec<usize>,
    corpus: Vec<String>,
    /// `∞`-norm scans only run for odd `r`.
    odd_r_at_inf: bool,
    operator_degrees: Vec<usize>,
    operator_r: Vec<usize>,
    max_slope: f64,
    zero_tol: f64,
}

pub(super) fn thm44(p: &mut Params) -> Result<Prepared> {
    let s = BallKEquivalence {
        mu: p.f64s("mu", &[0.0])?,
        exactness: p.usize("exactness", 96)?,
        r: p.usizes("r", &[1, 2, 3])?,
        p: p.exponents("p", &[2.0, f64::INFINITY])?,
        // K is read off candidates of degree ≤ 16: t ≥ 1/32 keeps the
        // minimizing degree in range, t ≤ 1/4 skips the coarse regime.
        dyadic: p.usizes("dyadic", &[2, 3, 4, 5])?,
        degrees: p.usizes("degrees", &[1, 2, 4, 8, 16])?,
        corpus: p.strings("corpus", &["poly6", "abs", "falpha", "bump"])?,
        odd_r_at_inf: true,
        operator_degrees: p.usizes("operator_degrees", &[2, 4, 8, 16])?,
        operator_r: p.usizes("operator_r", &[1])?,
        max_slope: p.positive("max_slope", 0.2)?,
        zero_tol: p.positive("zero_tol", 1e-10)?,
    };
    check_mu(&s.mu)?;
    check_ns(&s.r, "r")?;
    check_ns(&s.degrees, "degrees")?;
    check_ns(&s.operator_r, "operator_r")?;
    if s.r.iter().any(|r| *r > 4) {
        return Err(VerifyError::config("`r` entries must be at most 4"));
    }
    select(Domain::Ball(2), &s.corpus)?;
    Ok(Prepared::new(resolution(&s), move |_| {
        let entries = select(Domain::Ball(2), &s.corpus).expect("validated");
        let ts: Vec<f64> = s.dyadic.iter().map(|k| 0.5f64.powi(*k as i32)).collect();
        let one_sided = TrendCriteria { max_slope: s.max_slope, max_spread: None, two_sided: false };
        let mut out = Vec::new();
        for &mu in &s.mu {
            out.extend(guard(&format!("mu={mu}"), || {
                let rules = BallRules::new(2, mu, s.exactness)?;
                let mut cases = Vec::new();
                for e in &entries {
                    for &p in &s.p {
                        for &r in s.r.iter().filter(|r| p.is_finite() || *r % 2 == 1) {
                            let name = format!("mu={mu}/{}/r={r}/p={}", e.name, p_label(p));
                            cases.extend(guard(&name, || {
                                let cands = kfunc_ball_candidates(&e.handle, r, p, &rules, &s.degrees)?;
                                let norm = lp_norm_ball(&e.handle, p, &rules.base)?;
                                let mut pts = Vec::new();
                                for &t in &ts {
                                    let k = kfunc_ball_from_candidates(&cands, r, t)?.value;
                                    let kh = hat_kfunc_ball_from_candidates(&cands, r, t)?.value;
                                    if r == 1 {
                                        pts.push(ScanPoint { x: t, lhs: k, rhs: kh });
                                    } else {
                                        pts.push(ScanPoint { x: t, lhs: k, rhs: kh + t.powi(r as i32) * norm });
                                    }
                                }
                                Ok(if r == 1 {
                                    band_cases(&format!("{name}/k_vs_khat"), "t", &pts, s.zero_tol, s.max_slope)
                                } else {
                                    scan_cases(&format!("{name}/k_le_khat"), "t", &pts, s.zero_tol, &one_sided)
                                })
                            }));
                        }
                    }
                }
                Ok(cases)
            }));
            out.extend(guard(&format!("operators/mu={mu}"), || operator_cases(mu, &s, &one_sided)));
        }
        out
    }))
}

/// `g_n = x_1^n + x_2^n + x_1 x_2^{n−1}`.
fn operator_family(n: usize) -> MultiPoly {
    let n = n as u32;
    MultiPoly::from_terms(2, [(vec![n, 0], 1.0), (vec![0, n], 1.0), (vec![1, n - 1], 1.0)])
}

fn poly_norm(p: &MultiPoly, rule: &BallRule) -> sphereball::Result<f64> {
    let v: Vec<f64> = rule.points.iter().map(|x| p.eval(x)).collect::<sphereball::Result<_>>()?;
    Ok(rule.integrate_values(&v.iter().map(|x| x * x).collect::<Vec<_>>()).sqrt())
}

/// Equivalences between the second-order ball operators, scanned over the
/// degree of a polynomial family (abscissa `t = 1/n`).
fn operator_cases(mu: f64, s: &BallKEquivalence, one_sided: &TrendCriteria) -> sphereball::Result<Vec<Case>> {
    let top = *s.operator_degrees.iter().max().expect("non-empty");
    let rule = ball_rule(2, mu, 2 * top + 2)?;
    let phi2 = &MultiPoly::constant(2, 1.0) - &MultiPoly::norm_sq(2);
    let mut dmu = Vec::new();
    let mut out = Vec::new();
    for &n in &s.operator_degrees {
        let g = operator_family(n);
        let lhs = poly_norm(&dmu_poly(&g, mu)?, &rule)?;
        let mut rhs = 0.0;
        for i in 0..2 {
            rhs += poly_norm(&dii_sq_poly(&g, i, mu)?, &rule)?;
        }
        for (i, j) in planes(2) {
            rhs += poly_norm(&dij_pow_poly(&g, i, j, 2)?, &rule)?;
        }
        dmu.push(ScanPoint { x: 1.0 / n as f64, lhs, rhs });
    }
    out.extend(band_cases(&format!("operators/mu={mu}/dmu"), "t", &dmu, s.zero_tol, s.max_slope));
    for &r in &s.operator_r {
        for i in 0..2 {
            let mut lower = Vec::new();
            let mut upper = Vec::new();
            for &n in s.operator_degrees.iter().filter(|n| **n >= 2 * r) {
                let g = operator_family(n);
                let mut dg = g.clone();
                let mut pg = g.clone();
                for _ in 0..r {
                    dg = dii_sq_poly(&dg, i, mu)?;
                }
                for _ in 0..2 * r {
                    pg = pg.partial(i)?;
                }
                pg = &pg * &phi2.pow(r as u32);
                let (nd, np, ng) = (poly_norm(&dg, &rule)?, poly_norm(&pg, &rule)?, poly_norm(&g, &rule)?);
                let x = 1.0 / n as f64;
                lower.push(ScanPoint { x, lhs: np, rhs: nd });
                upper.push(ScanPoint { x, lhs: nd, rhs: np + ng });
            }
            let name = format!("operators/mu={mu}/dii/r={r}/i={}", i + 1);
            out.extend(scan_cases(&format!("{name}/lower"), "t", &lower, s.zero_tol, one_sided));
            out.extend(scan_cases(&format!("{name}/upper"), "t", &upper, s.zero_tol, one_sided));
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct Simul {
    mu: Vec<f64>,
    exactness: usize,
    ns: Vec<usize>,
    r: Vec<usize>,
    corpus: Vec<String>,
    max_slope: f64,
    zero_tol: f64,
}

pub(super) fn simul(p: &mut Params) -> Result<Prepared> {
    let s = Simul {
        mu: p.f64s("mu", &[0.0, 0.5])?,
        exactness: p.usize("exactness", 68)?,
        ns: p.usizes("ns", &[4, 8, 16])?,
        r: p.usizes("r", &[1, 2])?,
        corpus: p.strings("corpus", &SMOOTH)?,
        max_slope: p.positive("max_slope", 0.2)?,
        zero_tol: p.positive("zero_tol", 1e-10)?,
    };
    check_mu(&s.mu)?;
    check_ns(&s.ns, "ns")?;
    check_ns(&s.r, "r")?;
    let top = *s.ns.iter().max().expect("non-empty");
    if 2 * top + 2 > s.exactness / 2 {
        return Err(VerifyError::config(format!("exactness {} cannot resolve V_n for n = {top}", s.exactness)));
    }
    select(Domain::Ball(2), &s.corpus)?;
    Ok(Prepared::new(resolution(&s), move |_| {
        let crit = TrendCriteria { max_slope: s.max_slope, max_spread: None, two_sided: false };
        let entries = select(Domain::Ball(2), &s.corpus).expect("validated");
        let mut out = Vec::new();
        for &mu in &s.mu {
            out.extend(guard(&format!("mu={mu}"), || {
                let rules = BallRules::new(2, mu, s.exactness)?;
                let mut cases = Vec::new();
                for e in &entries {
                    for &r in &s.r {
                        let name = format!("mu={mu}/{}/r={r}", e.name);
                        cases.extend(guard(&name, || {
                            let zero = s.zero_tol * lp_norm_ball(&e.handle, 2.0, &rules.base)?;
                            let specs = s.ns.iter().map(|&n| BallKernelSpec::new(n, 2, mu)).collect::<sphereball::Result<Vec<_>>>()?;
                            let vals = simultaneous_ball_scan(&e.handle, &specs, r, 0, 1, &rules)?;
                            let pts: Vec<ScanPoint> = s
                                .ns
                                .iter()
                                .zip(vals)
                                .map(|(&n, v)| ScanPoint { x: n as f64, lhs: v.residual, rhs: v.best })
                                .collect();
                            Ok(scan_cases(&name, "n", &pts, zero, &crit))
                        }));
                    }
                }
                Ok(cases)
            }));
        }
        out
    }))
}

#[derive(Serialize)]
struct FAlpha {
    d: usize,
    mu: f64,
    degree: usize,
    r: usize,
    alpha: Vec<f64>,
    dyadic: Vec<usize>,
    theta_steps: usize,
    slope_tol: f64,
}

pub(super) fn falpha(p: &mut Params) -> Result<Prepared> {
    let s = FAlpha {
        d: p.usize("d", 2)?,
        mu: p.f64("mu", 0.0)?,
        degree: p.usize("degree", 32)?,
        r: p.usize("r", 2)?,
        alpha: p.f64s("alpha", &[0.75])?,
        dyadic: p.usizes("dyadic", &[3, 4, 5, 6, 7, 8, 9])?,
        theta_steps: p.usize("theta_steps", 16)?,
        slope_tol: p.positive("slope_tol", 0.15)?,
    };
    check_mu(&[s.mu])?;
    if !(1..=2).contains(&s.d) {
        return Err(VerifyError::config("scan.falpha supports d ∈ {1, 2}"));
    }
    for &a in &s.alpha {
        falpha_entry(Domain::Ball(s.d), a)?;
    }
    if s.dyadic.len() < 2 {
        return Err(VerifyError::config("scan.falpha needs at least two dyadic levels"));
    }
    Ok(Prepared::new(resolution(&s), move |_| {
        let ts: Vec<f64> = s.dyadic.iter().map(|k| 0.5f64.powi(*k as i32)).collect();
        let grid = ThetaGrid { steps: s.theta_steps };
        guard("falpha", || {
            let rules = BallRules::new(s.d, s.mu, s.degree)?;
            let mut cases = Vec::new();
            for &alpha in &s.alpha {
                let f = falpha_entry(Domain::Ball(s.d), alpha).expect("validated").handle;
                let w = modulus_ball_profile(&f, s.r, &ts, f64::INFINITY, &rules, &grid)?;
                let lx: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
                let ly: Vec<f64> = w.iter().map(|w| w.ln()).collect();
                let slope = ls_slope(&lx, &ly);
                let want = 2.0 * alpha;
                let mut c = Case::new(format!("alpha={alpha}"), slope, want, (slope - want).abs() <= s.slope_tol);
                c.slope = Some(slope);
                c.residual = Some((slope - want).abs());
                cases.push(c.with("alpha", alpha).with("r", s.r).with("p", "inf"));
            }
            Ok(cases)
        })
    }))
}

pub(super) fn lip(p: &mut Params) -> Result<Prepared> {
    let s = lip_settings(p, 32, true)?;
    check_mu(&s.mu)?;
    Ok(Prepared::new(resolution(&s), move |_| {
        let entries = select(Domain::Ball(2), &s.corpus).expect("validated");
        let mut out = Vec::new();
        for &mu in &s.mu {
            out.extend(guard(&format!("mu={mu}"), || {
                let rules = BallRules::new(2, mu, s.exactness)?;
                let mut cases = Vec::new();
                for e in &entries {
                    for &p in &s.p {
                        let name = format!("mu={mu}/{}/p={}", e.name, p_label(p));
                        cases.extend(guard(&name, || {
                            let w = lipschitz_norm_ball_dyadic(&e.handle, s.r, s.alpha, s.ell, p, &rules, &s.dyadic)?;
                            let h = hnorm_ball_dyadic(&e.handle, s.r, s.alpha, s.ell, p, &rules, s.top())?;
                            Ok(band_cases(&name, "t", &s.points(&w, &h), 0.0, s.max_slope))
                        }));
                    }
                }
                Ok(cases)
            }));
        }
        out
    }))
}

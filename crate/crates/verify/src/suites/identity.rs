use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sphereball::ball::{
    d_id1_direct_handle, d_id1_explicit, d_id1_tilde, norm_did1, norm_did1_direct, ball_rule, ROTATION_STEP,
};
use sphereball::ball_approx::{vnmu_apply, BallKernelSpec};
use sphereball::poly::{
    dii_sq_poly, dij_pow_poly, dmu_poly, laplace_beltrami_poly, laplace_beltrami_radial, monomials_up_to,
};
use sphereball::sphere::{sphere_rule, values_on};
use sphereball::sphere_approx::{dij_handle, project_degree_poly, vn_apply, vn_dij, ZonalSpec, DEFAULT_DERIVATIVE_STEP};
use sphereball::{Domain, FnHandle, MultiPoly};

use super::{resolution, guard, planes, Ctx, Prepared};
use crate::config::Params;
use crate::error::{Result, VerifyError};
use crate::report::Case;

fn random_poly(rng: &mut ChaCha8Rng, d: usize, degree: u32) -> MultiPoly {
    monomials_up_to(d, degree)
        .iter()
        .fold(MultiPoly::zero(d), |acc, m| &acc + &m.scale(rng.gen_range(-1.0..1.0)))
}

/// Uniform point of `B^d` by rejection.
fn random_ball_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if x.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            return x;
        }
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn poly_values(p: &MultiPoly, points: &[Vec<f64>]) -> sphereball::Result<Vec<f64>> {
    points.iter().map(|x| p.eval(x)).collect()
}

fn check_dims(dims: &[usize], lo: usize, hi: usize, key: &str) -> Result<()> {
    match dims.iter().find(|d| !(lo..=hi).contains(*d)) {
        Some(d) => Err(VerifyError::config(format!("`{key}` entry {d} outside {lo}..={hi}"))),
        None => Ok(()),
    }
}

fn check_mu(mu: &[f64]) -> Result<()> {
    match mu.iter().find(|m| **m != 0.0 && **m != 0.5) {
        Some(m) => Err(VerifyError::config(format!("μ = {m} is not supported; use 0 or 0.5"))),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct Eigen {
    dims: Vec<usize>,
    max_degree: usize,
    exactness: usize,
    tol: f64,
}

pub(super) fn eigen(p: &mut Params) -> Result<Prepared> {
    let s = Eigen {
        dims: p.usizes("dims", &[3])?,
        max_degree: p.usize("max_degree", 8)?,
        exactness: p.usize("exactness", 40)?,
        tol: p.positive("tol", 1e-8)?,
    };
    check_dims(&s.dims, 2, 4, "dims")?;
    Ok(Prepared::new(resolution(&s), move |_| {
        let mut out = Vec::new();
        for &d in &s.dims {
            out.extend(guard(&format!("d={d}"), || {
                let nodes = sphere_rule(d, s.exactness)?.points;
                let mut cases = Vec::new();
                for n in 0..=s.max_degree as u32 {
                    let mut worst = 0.0_f64;
                    let mut count = 0;
                    for m in monomials_up_to(d, n).iter().filter(|m| m.degree() == n) {
                        let y = project_degree_poly(m, n as usize)?;
                        if y.max_abs_coeff() < 1e-12 {
                            continue;
                        }
                        count += 1;
                        let ly = laplace_beltrami_poly(&y)?;
                        let ev = (n * (n + d as u32 - 2)) as f64;
                        let yv = poly_values(&y, &nodes)?;
                        let lv = poly_values(&ly, &nodes)?;
                        let r: Vec<f64> = lv.iter().zip(&yv).map(|(l, y)| l + ev * y).collect();
                        worst = worst.max(max_abs(&r) / max_abs(&yv));
                    }
                    cases.push(
                        Case::residual(format!("d={d}/n={n}"), worst, s.tol)
                            .with("d", d)
                            .with("n", n)
                            .with("harmonics", count),
                    );
                }
                Ok(cases)
            }));
        }
        out
    }))
}

#[derive(Serialize)]
struct Decomp {
    dims: Vec<usize>,
    max_degree: u32,
    mu: Vec<f64>,
    tol: f64,
}

/// Largest coefficient of `a − b` relative to the larger of 1 and `b`'s largest coefficient.
fn coeff_residual(a: &MultiPoly, b: &MultiPoly) -> f64 {
    (a - b).max_abs_coeff() / b.max_abs_coeff().max(1.0)
}

pub(super) fn decomp(p: &mut Params) -> Result<Prepared> {
    let s = Decomp {
        dims: p.usizes("dims", &[1, 2, 3])?,
        max_degree: p.usize("max_degree", 8)? as u32,
        mu: p.f64s("mu", &[0.0, 0.5])?,
        tol: p.positive("tol", 1e-10)?,
    };
    check_dims(&s.dims, 1, 4, "dims")?;
    if s.mu.iter().any(|m| *m < 0.0) {
        return Err(VerifyError::config("μ must be ≥ 0"));
    }
    Ok(Prepared::new(resolution(&s), move |_| {
        let mut out = Vec::new();
        for &d in &s.dims {
            let monos = monomials_up_to(d, s.max_degree);
            if d >= 2 {
                out.extend(guard(&format!("laplace_beltrami/d={d}"), || {
                    let mut worst = 0.0_f64;
                    for m in &monos {
                        worst = worst.max(coeff_residual(&laplace_beltrami_poly(m)?, &laplace_beltrami_radial(m)?));
                    }
                    Ok(vec![Case::residual(format!("laplace_beltrami/d={d}"), worst, s.tol)
                        .with("d", d)
                        .with("monomials", monos.len())])
                }));
            }
            for &mu in &s.mu {
                out.extend(guard(&format!("dmu/d={d}/mu={mu}"), || {
                    let mut worst = 0.0_f64;
                    for m in &monos {
                        let mut sum = MultiPoly::zero(d);
                        for i in 0..d {
                            sum = &sum + &dii_sq_poly(m, i, mu)?;
                        }
                        for (i, j) in planes(d) {
                            sum = &sum + &dij_pow_poly(m, i, j, 2)?;
                        }
                        worst = worst.max(coeff_residual(&sum, &dmu_poly(m, mu)?));
                    }
                    Ok(vec![Case::residual(format!("dmu/d={d}/mu={mu}"), worst, s.tol)
                        .with("d", d)
                        .with("mu", mu)
                        .with("monomials", monos.len())])
                }));
            }
        }
        out
    }))
}

#[derive(Serialize)]
struct Parts {
    pairs: usize,
    max_degree: u32,
    exactness: usize,
    tol: f64,
}

pub(super) fn parts(p: &mut Params) -> Result<Prepared> {
    let s = Parts {
        pairs: p.usize("pairs", 20)?,
        max_degree: p.usize("max_degree", 6)? as u32,
        exactness: p.usize("exactness", 14)?,
        tol: p.positive("tol", 1e-9)?,
    };
    if s.exactness < 2 * s.max_degree as usize {
        return Err(VerifyError::config("identity.parts needs exactness ≥ 2 · max_degree"));
    }
    Ok(Prepared::new(resolution(&s), move |ctx: &Ctx| {
        let mut rng = ctx.rng();
        guard("parts", || {
            let rule = sphere_rule(3, s.exactness)?;
            let norm = |v: &[f64]| rule.integrate_values(&v.iter().map(|x| x * x).collect::<Vec<_>>()).sqrt();
            let mut cases = Vec::new();
            for k in 0..s.pairs {
                let f = random_poly(&mut rng, 3, s.max_degree);
                let g = random_poly(&mut rng, 3, s.max_degree);
                let (fv, gv) = (poly_values(&f, &rule.points)?, poly_values(&g, &rule.points)?);
                let scale = norm(&fv) * norm(&gv);
                let mut worst = 0.0_f64;
                for (i, j) in planes(3) {
                    let dg = poly_values(&dij_pow_poly(&g, i, j, 1)?, &rule.points)?;
                    let df = poly_values(&dij_pow_poly(&f, i, j, 1)?, &rule.points)?;
                    let v: Vec<f64> = (0..fv.len()).map(|n| fv[n] * dg[n] + df[n] * gv[n]).collect();
                    worst = worst.max(rule.integrate_values(&v).abs() / scale);
                }
                cases.push(Case::residual(format!("pair={k}"), worst, s.tol).with("pair", k));
            }
            Ok(cases)
        })
    }))
}

#[derive(Serialize)]
struct Commute {
    max_degree: usize,
    exactness: usize,
    r: Vec<usize>,
    ball_degree: usize,
    mu: Vec<f64>,
    ball_nodes: usize,
    reproduce_tol: f64,
    commute_tol: f64,
}

pub(super) fn commute(p: &mut Params) -> Result<Prepared> {
    let s = Commute {
        max_degree: p.usize("max_degree", 8)?,
        exactness: p.usize("exactness", 40)?,
        r: p.usizes("r", &[1, 2])?,
        ball_degree: p.usize("ball_degree", 32)?,
        mu: p.f64s("mu", &[0.0, 0.5])?,
        ball_nodes: p.usize("ball_nodes", 40)?,
        reproduce_tol: p.positive("reproduce_tol", 1e-8)?,
        commute_tol: p.positive("commute_tol", 1e-7)?,
    };
    check_mu(&s.mu)?;
    if s.exactness < 3 * s.max_degree + 4 {
        return Err(VerifyError::config("identity.commute needs exactness ≥ 3 · max_degree + 4"));
    }
    if s.ball_degree < 3 * s.max_degree {
        return Err(VerifyError::config("identity.commute needs ball_degree ≥ 3 · max_degree"));
    }
    Ok(Prepared::new(resolution(&s), move |ctx: &Ctx| {
        let mut rng = ctx.rng();
        let mut out = Vec::new();
        for n in 1..=s.max_degree {
            let f = random_poly(&mut rng, 3, n as u32);
            let g = random_poly(&mut rng, 3, n as u32 + 4);
            out.extend(guard(&format!("sphere/n={n}"), || {
                let rule = sphere_rule(3, s.exactness)?;
                let spec = ZonalSpec::new(n, 3)?;
                let fh = FnHandle::from_poly(Domain::Sphere(3), "f", f.clone())?;
                let vf = values_on(&vn_apply(&fh, &spec, &rule)?, &rule.points)?;
                let err = max_abs_diff(&vf, &poly_values(&f, &rule.points)?);
                let mut cases =
                    vec![Case::residual(format!("sphere/reproduce/n={n}"), err, s.reproduce_tol).with("n", n)];
                let gh = FnHandle::from_poly(Domain::Sphere(3), "g", g.clone())?;
                for &r in &s.r {
                    let mut worst = 0.0_f64;
                    for (i, j) in planes(3) {
                        let a = values_on(&vn_dij(&gh, &spec, r, i, j, &rule)?, &rule.points)?;
                        let dg = dij_handle(&gh, r, i, j, DEFAULT_DERIVATIVE_STEP)?;
                        let b = values_on(&vn_apply(&dg, &spec, &rule)?, &rule.points)?;
                        worst = worst.max(max_abs_diff(&a, &b));
                    }
                    cases.push(
                        Case::residual(format!("sphere/commute/n={n}/r={r}"), worst, s.commute_tol)
                            .with("n", n)
                            .with("r", r),
                    );
                }
                Ok(cases)
            }));
            let fb = random_poly(&mut rng, 2, n as u32);
            let gb = random_poly(&mut rng, 2, n as u32 + 2);
            for &mu in &s.mu {
                out.extend(guard(&format!("ball/n={n}/mu={mu}"), || {
                    let rule = ball_rule(2, mu, s.ball_degree)?;
                    let spec = BallKernelSpec::new(n, 2, mu)?;
                    let fh = FnHandle::from_poly(Domain::Ball(2), "f", fb.clone())?;
                    let vf = values_on(&vnmu_apply(&fh, &spec, &rule)?, &rule.points)?;
                    let err = max_abs_diff(&vf, &poly_values(&fb, &rule.points)?);
                    let mut cases = vec![Case::residual(format!("ball/reproduce/n={n}/mu={mu}"), err, s.reproduce_tol)
                        .with("n", n)
                        .with("mu", mu)];
                    let gh = FnHandle::from_poly(Domain::Ball(2), "g", gb.clone())?;
                    let step = (rule.points.len() / s.ball_nodes.max(1)).max(1);
                    let sample: Vec<Vec<f64>> = rule.points.iter().step_by(step).cloned().collect();
                    let vg = vnmu_apply(&gh, &spec, &rule)?;
                    for &r in &s.r {
                        let a = values_on(&dij_handle(&vg, r, 0, 1, DEFAULT_DERIVATIVE_STEP)?, &sample)?;
                        let dg = dij_handle(&gh, r, 0, 1, DEFAULT_DERIVATIVE_STEP)?;
                        let b = values_on(&vnmu_apply(&dg, &spec, &rule)?, &sample)?;
                        cases.push(
                            Case::residual(format!("ball/commute/n={n}/mu={mu}/r={r}"), max_abs_diff(&a, &b), s.commute_tol)
                                .with("n", n)
                                .with("mu", mu)
                                .with("r", r)
                                .with("nodes", sample.len()),
                        );
                    }
                    Ok(cases)
                }));
            }
        }
        out
    }))
}

#[derive(Serialize)]
struct LiftedDerivative {
    points: usize,
    polys: usize,
    max_degree: u32,
    max_r: usize,
    tol: f64,
    /// For non-polynomial `f` both sides difference with step `ROTATION_STEP`,
    /// so agreement is only `O(h²)`.
    numeric_tol: f64,
}

pub(super) fn lemma46(p: &mut Params) -> Result<Prepared> {
    let s = LiftedDerivative {
        points: p.usize("points", 200)?,
        polys: p.usize("polys", 4)?,
        max_degree: p.usize("max_degree", 4)? as u32,
        max_r: p.usize("max_r", 3)?,
        tol: p.positive("tol", 1e-8)?,
        numeric_tol: p.positive("numeric_tol", 1e-4)?,
    };
    Ok(Prepared::new(resolution(&s), move |ctx: &Ctx| {
        let mut rng = ctx.rng();
        let pts: Vec<Vec<f64>> = (0..s.points).map(|_| random_ball_point(&mut rng, 3)).collect();
        let mut out = Vec::new();
        for k in 0..s.polys {
            let f = random_poly(&mut rng, 2, s.max_degree);
            out.extend(guard(&format!("poly={k}"), || {
                let fh = FnHandle::from_poly(Domain::Ball(2), "f", f.clone())?;
                let mut cases = Vec::new();
                for r in 1..=s.max_r {
                    let mut worst = 0.0_f64;
                    let mut scale = 1.0_f64;
                    for i in 0..2 {
                        let direct = d_id1_direct_handle(&fh, r, i, Domain::Ball(3))?;
                        for y in &pts {
                            let a = d_id1_tilde(&fh, r, i, y)?;
                            let b = direct.eval(y)?;
                            worst = worst.max((a - b).abs());
                            scale = scale.max(b.abs());
                        }
                    }
                    cases.push(
                        Case::residual(format!("poly={k}/r={r}"), worst / scale, s.tol)
                            .with("r", r)
                            .with("points", pts.len()),
                    );
                }
                Ok(cases)
            }));
        }
        let smooth = FnHandle::new(Domain::Ball(2), "exp", |x| (x[0] - 0.5 * x[1]).exp() + (2.0 * x[1]).sin());
        out.extend(guard("smooth", || {
            let mut cases = Vec::new();
            for r in 1..=s.max_r {
                let mut worst = 0.0_f64;
                let mut scale = 1.0_f64;
                for i in 0..2 {
                    for y in &pts {
                        let a = d_id1_explicit(&smooth, r, i, y, ROTATION_STEP)?;
                        let b = d_id1_tilde(&smooth, r, i, y)?;
                        worst = worst.max((a - b).abs());
                        scale = scale.max(b.abs());
                    }
                }
                cases.push(Case::residual(format!("smooth/r={r}"), worst / scale, s.numeric_tol).with("r", r));
            }
            Ok(cases)
        }));
        out
    }))
}

#[derive(Serialize)]
struct Parity {
    points: usize,
    polys: usize,
    max_degree: u32,
    max_r: usize,
    tol: f64,
}

pub(super) fn parity(p: &mut Params) -> Result<Prepared> {
    let s = Parity {
        points: p.usize("points", 200)?,
        polys: p.usize("polys", 4)?,
        max_degree: p.usize("max_degree", 4)? as u32,
        max_r: p.usize("max_r", 4)?,
        tol: p.positive("tol", 1e-12)?,
    };
    Ok(Prepared::new(resolution(&s), move |ctx: &Ctx| {
        let mut rng = ctx.rng();
        let pts: Vec<Vec<f64>> = (0..s.points).map(|_| random_ball_point(&mut rng, 3)).collect();
        let mut out = Vec::new();
        for k in 0..s.polys {
            let f = random_poly(&mut rng, 2, s.max_degree);
            out.extend(guard(&format!("poly={k}"), || {
                let fh = FnHandle::from_poly(Domain::Ball(2), "f", f.clone())?;
                let mut cases = Vec::new();
                for r in 1..=s.max_r {
                    let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                    let mut worst = 0.0_f64;
                    let mut scale = 1.0_f64;
                    for i in 0..2 {
                        let g = d_id1_direct_handle(&fh, r, i, Domain::Ball(3))?;
                        for y in &pts {
                            let mut z = y.clone();
                            z[2] = -z[2];
                            let (a, b) = (g.eval(&z)?, g.eval(y)?);
                            worst = worst.max((a - sign * b).abs());
                            scale = scale.max(b.abs());
                        }
                    }
                    cases.push(Case::residual(format!("poly={k}/r={r}"), worst / scale, s.tol).with("r", r));
                }
                Ok(cases)
            }));
        }
        out
    }))
}

#[derive(Serialize)]
struct TwoRouteNorm {
    degree: usize,
    mu: Vec<f64>,
    r: Vec<usize>,
    tol: f64,
}

pub(super) fn prop48(p: &mut Params) -> Result<Prepared> {
    let s = TwoRouteNorm {
        degree: p.usize("degree", 32)?,
        mu: p.f64s("mu", &[0.0, 0.5])?,
        r: p.usizes("r", &[1, 2, 3])?,
        tol: p.positive("tol", 1e-6)?,
    };
    check_mu(&s.mu)?;
    Ok(Prepared::new(resolution(&s), move |ctx: &Ctx| {
        let mut rng = ctx.rng();
        let poly = FnHandle::from_poly(Domain::Ball(2), "poly", random_poly(&mut rng, 2, 4)).expect("dimension 2");
        let smooth = FnHandle::new(Domain::Ball(2), "smooth", |x| (x[0] - 0.5 * x[1]).exp() + (2.0 * x[1]).sin());
        let mut out = Vec::new();
        for f in [&poly, &smooth] {
            for &mu in &s.mu {
                for &r in &s.r {
                    let name = format!("{}/mu={mu}/r={r}", f.name());
                    out.extend(guard(&name, || {
                        let mut worst = 0.0_f64;
                        let (mut lhs, mut rhs) = (0.0, 0.0);
                        for i in 0..2 {
                            let a = norm_did1(f, r, i, 2.0, mu, s.degree)?.value;
                            let b = norm_did1_direct(f, r, i, 2.0, mu, s.degree)?.value;
                            let rel = (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
                            if rel >= worst {
                                (worst, lhs, rhs) = (rel, a, b);
                            }
                        }
                        let mut c = Case::residual(name.clone(), worst, s.tol).with("mu", mu).with("r", r);
                        (c.lhs, c.rhs) = (lhs, rhs);
                        c.pass = worst < s.tol;
                        Ok(vec![c.with("tol", s.tol)])
                    }));
                }
            }
        }
        out
    }))
}

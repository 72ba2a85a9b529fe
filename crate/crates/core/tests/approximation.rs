use std::f64::consts::PI;

use sphereball::ball::ball_rule;
use sphereball::ball_approx::{vnmu_apply, BallExpansion, BallKernelSpec, BallRules};
use sphereball::sphere::sphere_rule;
use sphereball::sphere_approx::{vn_apply, HarmonicExpansion, ZonalSpec};
use sphereball::{Domain, FnHandle, MultiPoly};

fn x(dim: usize, i: usize) -> MultiPoly {
    MultiPoly::var(dim, i)
}

#[test]
fn sphere_operator_reproduces_low_degree_polynomials() {
    let n = 4;
    let p = &(&(&x(3, 0) * &x(3, 1)) * &x(3, 2)) + &x(3, 2).pow(4).scale(0.5);
    let f = FnHandle::from_poly(Domain::Sphere(3), "p", p.clone()).unwrap();
    let spec = ZonalSpec::new(n, 3).unwrap();
    let rule = sphere_rule(3, 3 * n + 4).unwrap();
    let v = vn_apply(&f, &spec, &rule).unwrap();
    for pt in [[0.0, 0.0, 1.0], [0.6, 0.0, 0.8], [0.48, -0.6, 0.64]] {
        assert!((v.eval(&pt).unwrap() - p.eval(&pt).unwrap()).abs() < 1e-10);
    }
}

#[test]
fn ball_operator_reproduces_low_degree_polynomials() {
    let n = 4;
    let p = &(&x(2, 0).pow(3) * &x(2, 1)) - &x(2, 1).pow(2);
    let f = FnHandle::from_poly(Domain::Ball(2), "p", p.clone()).unwrap();
    for mu in [0.0, 0.5] {
        let spec = BallKernelSpec::new(n, 2, mu).unwrap();
        let rule = ball_rule(2, mu, 3 * n + 4).unwrap();
        let v = vnmu_apply(&f, &spec, &rule).unwrap();
        for pt in [[0.0, 0.0], [0.3, -0.5], [0.9, 0.1]] {
            assert!((v.eval(&pt).unwrap() - p.eval(&pt).unwrap()).abs() < 1e-10, "mu={mu}");
        }
    }
}

#[test]
fn sphere_best_error_of_a_quadratic() {
    // x_3² = 1/3 + (x_3² − 1/3); the second term is a degree-2 harmonic of
    // squared norm 16π/45.
    let f = FnHandle::from_poly(Domain::Sphere(3), "z2", x(3, 2).pow(2)).unwrap();
    let h = HarmonicExpansion::new(&f, 4, &sphere_rule(3, 12).unwrap()).unwrap();
    let want = (16.0 * PI / 45.0).sqrt();
    assert!((h.best_l2_error(1).unwrap() - want).abs() < 1e-12);
    assert!((h.best_l2_error(2).unwrap() - want).abs() < 1e-12);
    assert!(h.best_l2_error(3).unwrap() < 1e-12);
}

#[test]
fn ball_best_error_of_a_quadratic() {
    // Lebesgue measure on B²: x_1² − 1/4 is orthogonal to Π_1 with squared norm π/16.
    let f = FnHandle::from_poly(Domain::Ball(2), "x2", x(2, 0).pow(2)).unwrap();
    let rules = BallRules::new(2, 0.5, 12).unwrap();
    let e = BallExpansion::new(&f, 4, &rules).unwrap();
    assert!((e.best_l2_error(0).unwrap() - PI.sqrt() / 4.0).abs() < 1e-12);
    assert!((e.best_l2_error(1).unwrap() - PI.sqrt() / 4.0).abs() < 1e-12);
    assert!(e.best_l2_error(2).unwrap() < 1e-12);
}

#[test]
fn best_errors_decrease_for_a_kink() {
    let f = FnHandle::new(Domain::Sphere(3), "abs", |p: &[f64]| p[2].abs());
    let h = HarmonicExpansion::new(&f, 33, &sphere_rule(3, 128).unwrap()).unwrap();
    let e: Vec<f64> = [4, 8, 16, 32].iter().map(|n| h.best_l2_error(*n + 1).unwrap()).collect();
    assert!(e.windows(2).all(|w| w[1] < w[0]));
    // |x_3| has Legendre coefficients decaying like k^{-3/2}, so E_n ~ n^{-1}.
    let rate = (e[0] / e[3]).ln() / 8f64.ln();
    assert!((0.8..1.4).contains(&rate), "rate {rate}");
}

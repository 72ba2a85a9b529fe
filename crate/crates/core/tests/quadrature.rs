use std::f64::consts::PI;

use proptest::prelude::*;
use sphereball::ball::{ball_mass, ball_rule};
use sphereball::ortho::{gauss_rule, GaussKind};
use sphereball::sphere::{sphere_area, sphere_rule};
use statrs::function::gamma::gamma;

/// `∫_{S^{d-1}} x^{2β} dσ = 2 Π Γ(β_i + ½) / Γ(|β| + d/2)`.
fn sphere_even_moment(beta: &[u32]) -> f64 {
    let d = beta.len() as f64;
    let s: u32 = beta.iter().sum();
    2.0 * beta.iter().map(|b| gamma(*b as f64 + 0.5)).product::<f64>() / gamma(s as f64 + d / 2.0)
}

/// `∫_{B^d} x^{2β} (1−‖x‖²)^{μ−½} dx`, in polar form with a beta integral in `r²`.
fn ball_even_moment(beta: &[u32], mu: f64) -> f64 {
    let d = beta.len() as f64;
    let s = beta.iter().sum::<u32>() as f64;
    let a = s + d / 2.0;
    let b = mu + 0.5;
    sphere_even_moment(beta) * 0.5 * gamma(a) * gamma(b) / gamma(a + b)
}

fn monomial(x: &[f64], e: &[u32]) -> f64 {
    x.iter().zip(e).map(|(v, k)| v.powi(*k as i32)).product()
}

#[test]
fn surface_areas() {
    assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
    assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
    assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
}

#[test]
fn ball_masses() {
    assert!((ball_mass(2, 0.0) - 2.0 * PI).abs() < 1e-13);
    assert!((ball_mass(2, 0.5) - PI).abs() < 1e-13);
    assert!((ball_mass(3, 0.5) - 4.0 * PI / 3.0).abs() < 1e-13);
    assert!((ball_mass(1, 0.0) - PI).abs() < 1e-13);
}

#[test]
fn gauss_legendre_matches_power_integrals() {
    for n in [1, 3, 8, 20] {
        let g = gauss_rule(GaussKind::Legendre, n).unwrap();
        for k in 0..2 * n {
            let want = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((g.integrate(|t| t.powi(k as i32)) - want).abs() < 1e-13, "n={n} k={k}");
        }
    }
}

#[test]
fn gauss_chebyshev_nodes_are_closed_form() {
    // Weight (1−t²)^{−½}: nodes cos((2k−1)π/2n), equal weights π/n.
    let n = 7;
    let g = gauss_rule(GaussKind::Jacobi { a: -0.5, b: -0.5 }, n).unwrap();
    let mut want: Vec<f64> = (1..=n).map(|k| ((2 * k - 1) as f64 * PI / (2 * n) as f64).cos()).collect();
    want.sort_by(f64::total_cmp);
    let mut got = g.nodes.clone();
    got.sort_by(f64::total_cmp);
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-13);
    }
    assert!(g.weights.iter().all(|w| (w - PI / n as f64).abs() < 1e-13));
}

#[test]
fn sphere_rule_is_exact_on_even_monomials() {
    for d in [2usize, 3, 4] {
        let rule = sphere_rule(d, 12).unwrap();
        let mut e = vec![0u32; d];
        for total in 0..=6u32 {
            e[0] = total;
            for split in 0..=total {
                e[0] = total - split;
                e[d - 1] = split;
                let twice: Vec<u32> = e.iter().map(|v| 2 * v).collect();
                let got: f64 = rule.points.iter().zip(&rule.weights).map(|(x, w)| w * monomial(x, &twice)).sum();
                let want = sphere_even_moment(&e);
                assert!((got - want).abs() < 1e-12 * want.max(1.0), "d={d} e={e:?}: {got} vs {want}");
            }
            e.iter_mut().for_each(|v| *v = 0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ball_rule_is_exact_on_even_monomials(
        d in 1usize..=3,
        mu in prop::sample::select(vec![0.0, 0.5, 1.0, 1.5]),
        e in prop::collection::vec(0u32..=2, 3),
    ) {
        // Total degree ≤ 12 stays within the rule's exactness.
        let e = &e[..d];
        let rule = ball_rule(d, mu, 12).unwrap();
        let twice: Vec<u32> = e.iter().map(|v| 2 * v).collect();
        let got: f64 = rule.points.iter().zip(&rule.weights).map(|(x, w)| w * monomial(x, &twice)).sum();
        let want = ball_even_moment(e, mu);
        prop_assert!((got - want).abs() < 1e-12 * want.max(1.0), "{got} vs {want}");
    }

    #[test]
    fn odd_monomials_integrate_to_zero(e in prop::collection::vec(0u32..=4, 3), k in 0usize..3) {
        let mut e = e;
        e[k] = 2 * e[k] + 1;
        let s = sphere_rule(3, 16).unwrap();
        let got: f64 = s.points.iter().zip(&s.weights).map(|(x, w)| w * monomial(x, &e)).sum();
        prop_assert!(got.abs() < 1e-13);
    }
}

use proptest::prelude::*;
use sphereball::poly::{
    dii_sq_poly, dij_poly, dij_pow_poly, dmu_poly, laplace_beltrami_poly, laplace_beltrami_radial, monomials_up_to,
};
use sphereball::MultiPoly;

fn poly(dim: usize, deg: u32, coeffs: &[f64]) -> MultiPoly {
    monomials_up_to(dim, deg)
        .iter()
        .zip(coeffs)
        .fold(MultiPoly::zero(dim), |acc, (m, c)| &acc + &m.scale(*c))
}

fn arb_poly3() -> impl Strategy<Value = MultiPoly> {
    // 20 monomials of degree ≤ 3 in three variables.
    prop::collection::vec(-2.0..2.0f64, 20).prop_map(|c| poly(3, 3, &c))
}

fn arb_point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 3)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn unit(x: &[f64]) -> Option<Vec<f64>> {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    (n > 1e-3).then(|| x.iter().map(|v| v / n).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn angular_derivative_is_antisymmetric(p in arb_poly3(), x in arb_point()) {
        let a = dij_poly(&p, 0, 2).unwrap().eval(&x).unwrap();
        let b = dij_poly(&p, 2, 0).unwrap().eval(&x).unwrap();
        prop_assert!(close(a, -b, 1e-12));
    }

    #[test]
    fn angular_derivative_obeys_leibniz(p in arb_poly3(), q in arb_poly3(), x in arb_point()) {
        let lhs = dij_poly(&(&p * &q), 0, 1).unwrap().eval(&x).unwrap();
        let rhs = dij_poly(&p, 0, 1).unwrap().eval(&x).unwrap() * q.eval(&x).unwrap()
            + p.eval(&x).unwrap() * dij_poly(&q, 0, 1).unwrap().eval(&x).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10));
    }

    #[test]
    fn angular_derivative_annihilates_radial_functions(k in 1u32..5, x in arb_point()) {
        let r = MultiPoly::norm_sq(3).pow(k);
        prop_assert!(dij_poly(&r, 1, 2).unwrap().eval(&x).unwrap().abs() < 1e-12);
    }

    #[test]
    fn laplace_beltrami_routes_agree_on_the_sphere(p in arb_poly3(), x in arb_point()) {
        if let Some(u) = unit(&x) {
            let a = laplace_beltrami_poly(&p).unwrap().eval(&u).unwrap();
            let b = laplace_beltrami_radial(&p).unwrap().eval(&u).unwrap();
            prop_assert!(close(a, b, 1e-10));
        }
    }

    #[test]
    fn plane_rotation_generator_is_a_derivative_along_the_circle(p in arb_poly3(), x in arb_point()) {
        // D_{0,1} p(x) = d/dθ p(R_θ x) at θ = 0 with R_θ rotating x_0 toward x_1.
        let h = 1e-5;
        let rot = |t: f64| vec![x[0] * t.cos() + x[1] * t.sin(), -x[0] * t.sin() + x[1] * t.cos(), x[2]];
        let fd = (p.eval(&rot(h)).unwrap() - p.eval(&rot(-h)).unwrap()) / (2.0 * h);
        let exact = dij_poly(&p, 0, 1).unwrap().eval(&x).unwrap();
        prop_assert!((fd - exact).abs() < 1e-6 * (1.0 + exact.abs()), "{fd} vs {exact}");
    }

    #[test]
    fn ball_operator_is_sum_of_pair_squares(p in arb_poly3(), mu in 0.0..2.0f64, x in arb_point()) {
        // D_μ = Σ_i D_{i,i}² + Σ_{i<j} D_{i,j}² on polynomials.
        let mut rhs = MultiPoly::zero(3);
        for i in 0..3 {
            rhs = &rhs + &dii_sq_poly(&p, i, mu).unwrap();
            for j in i + 1..3 {
                rhs = &rhs + &dij_pow_poly(&p, i, j, 2).unwrap();
            }
        }
        let lhs = dmu_poly(&p, mu).unwrap();
        prop_assert!(close(lhs.eval(&x).unwrap(), rhs.eval(&x).unwrap(), 1e-10));
    }
}

#[test]
fn spherical_harmonics_are_eigenfunctions() {
    // x_0 x_1 and x_0² − x_1² are harmonic of degree 2: eigenvalue −2(2+1).
    let x = |i| MultiPoly::var(3, i);
    for p in [&x(0) * &x(1), &(&x(0) * &x(0)) - &(&x(1) * &x(1))] {
        let lb = laplace_beltrami_poly(&p).unwrap();
        let u = [0.3, -0.4, (1.0f64 - 0.25).sqrt()];
        assert!((lb.eval(&u).unwrap() + 6.0 * p.eval(&u).unwrap()).abs() < 1e-13);
    }
}

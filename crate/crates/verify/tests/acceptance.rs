//! One line per acceptance criterion. Every criterion runs at its pinned
//! tolerances and within its time limit. A criterion listed in `UNATTAINABLE`
//! is still run and reported as FAIL, but does not fail the test.

use std::time::{Duration, Instant};

use sphereball::ball::{ball_mass, ball_rule};
use sphereball::ortho::{gauss_rule, GaussKind};
use sphereball::sphere::{sphere_area, sphere_rule};
use verify::config::Config;
use verify::report::{to_json, Report};
use verify::suites::suite_ids;
use verify::{run_suites, RunOptions};

/// Criteria that fail on the reference corpus for mathematical reasons, with
/// the reason printed next to the FAIL line.
const UNATTAINABLE: &[(usize, &str)] = &[(
    7,
    "E/ω and ω/inverse-sum ratios drift by more than |slope| 0.2 over n = 4..32 \
     (|x_3|: 0.21 even for exact values; C^∞ bump and polynomials leave the regime)",
)];

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(ids: &[&str], toml: &str) -> Vec<Report> {
    let cfg = Config::parse(toml, &suite_ids()).expect("valid config");
    let opts = RunOptions { stable: true, ..RunOptions::default() };
    ids.iter().flat_map(|id| run_suites(id, &cfg, &opts).expect("suite runs")).collect()
}

fn suites_pass(reports: &[Report]) -> Outcome {
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| r.cases.iter().filter(|c| !c.pass).map(move |c| format!("{}:{}", r.suite, c.name)))
        .collect();
    let cases: usize = reports.iter().map(|r| r.cases.len()).sum();
    Outcome {
        pass: failed.is_empty() && reports.iter().all(|r| r.pass),
        detail: if failed.is_empty() {
            format!("{cases} cases")
        } else {
            format!("{} of {cases} cases failed, first {}", failed.len(), failed[0])
        },
    }
}

fn worst_residual(reports: &[Report]) -> f64 {
    reports.iter().flat_map(|r| &r.cases).filter_map(|c| c.residual).fold(0.0, f64::max)
}

fn eigen() -> Outcome {
    let r = run(&["identity.eigen"], "[identity.eigen]\ndims = [3]\nmax_degree = 8\ntol = 1e-8\n");
    let mut o = suites_pass(&r);
    o.detail += &format!(", max residual {:.1e}", worst_residual(&r));
    o
}

fn decomp() -> Outcome {
    let r = run(
        &["identity.decomp"],
        "[identity.decomp]\ndims = [1, 2, 3]\nmax_degree = 8\nmu = [0.0, 0.5]\ntol = 1e-10\n",
    );
    let mut o = suites_pass(&r);
    o.detail += &format!(", max residual {:.1e}", worst_residual(&r));
    o
}

fn parts() -> Outcome {
    let r = run(&["identity.parts"], "[identity.parts]\nmax_degree = 6\nexactness = 14\ntol = 1e-9\n");
    let mut o = suites_pass(&r);
    o.detail += &format!(", max residual {:.1e}", worst_residual(&r));
    o
}

fn commute() -> Outcome {
    let r = run(
        &["identity.commute"],
        "[identity.commute]\nmax_degree = 8\nreproduce_tol = 1e-8\ncommute_tol = 1e-7\n",
    );
    let mut o = suites_pass(&r);
    o.detail += &format!(", max residual {:.1e}", worst_residual(&r));
    o
}

fn ball_lemmas() -> Outcome {
    let r = run(
        &["identity.lemma46", "identity.parity", "identity.prop48"],
        "[identity.lemma46]\npoints = 200\nmax_degree = 4\nmax_r = 3\ntol = 1e-8\n\
         [identity.parity]\npoints = 200\n\
         [identity.prop48]\ntol = 1e-6\n",
    );
    suites_pass(&r)
}

fn falpha() -> Outcome {
    let r = run(
        &["scan.falpha"],
        "[scan.falpha]\nd = 2\nmu = 0.0\nr = 2\nalpha = [0.75]\ndyadic = [3, 4, 5, 6, 7, 8, 9]\nslope_tol = 0.15\n",
    );
    let slope = r[0].cases[0].slope.unwrap_or(f64::NAN);
    Outcome { pass: (1.35..=1.65).contains(&slope) && r[0].pass, detail: format!("slope {slope:.4}") }
}

fn jackson() -> Outcome {
    let r = run(
        &["ineq.jackson.sphere", "ineq.inverse.sphere", "ineq.jackson.ball"],
        "[ineq.jackson.sphere]\nns = [4, 8, 16, 32]\nmax_slope = 0.2\nmax_spread = 4.0\n\
         [ineq.inverse.sphere]\nns = [4, 8, 16, 32]\nmax_slope = 0.2\nmax_spread = 4.0\n\
         [ineq.jackson.ball]\nns = [4, 8, 16, 32]\nmax_slope = 0.2\nmax_spread = 4.0\n",
    );
    let mut o = suites_pass(&r);
    let fits: Vec<String> = r
        .iter()
        .flat_map(|rep| rep.cases.iter().filter(|c| !c.pass).map(move |c| (rep, c)))
        .map(|(rep, c)| format!("{}:{} slope {:.2}", rep.suite, c.name, c.slope.unwrap_or(f64::NAN)))
        .collect();
    if !fits.is_empty() {
        o.detail += &format!(" [{}]", fits.join("; "));
    }
    o
}

fn simultaneous() -> Outcome {
    let r = run(
        &["ineq.simul.sphere", "ineq.simul.ball"],
        "[ineq.simul.sphere]\nns = [4, 8, 16]\nr = [1, 2]\nmax_slope = 0.2\n\
         [ineq.simul.ball]\nns = [4, 8, 16]\nr = [1, 2]\nmax_slope = 0.2\n",
    );
    suites_pass(&r)
}

fn bands() -> Outcome {
    let r = run(
        &["ineq.equiv.kmod", "ineq.thm44", "norms.lip.sphere", "norms.lip.ball"],
        "[ineq.equiv.kmod]\nmax_slope = 0.2\n[ineq.thm44]\nmax_slope = 0.2\n\
         [norms.lip.sphere]\nmax_slope = 0.2\n[norms.lip.ball]\nmax_slope = 0.2\n",
    );
    let mut o = suites_pass(&r);
    let inf_even = r
        .iter()
        .filter(|rep| rep.suite == "ineq.thm44")
        .flat_map(|rep| &rep.cases)
        .any(|c| c.name.contains("p=inf") && (c.name.contains("r=2") || c.name.contains("r=4")));
    let widest = r.iter().flat_map(|rep| &rep.cases).filter_map(|c| c.fitted_c).fold(0.0, f64::max);
    o.pass &= !inf_even && widest.is_finite();
    o.detail += &format!(", widest fitted c {widest:.2}");
    o
}

/// `∫_{S^2} x^a y^b z^c dσ` for even exponents.
fn sphere_moment(e: [u32; 3]) -> f64 {
    let dfact = |n: i64| (1..=n).rev().step_by(2).map(|k| k as f64).product::<f64>();
    let s: i64 = e.iter().map(|v| *v as i64).sum();
    4.0 * std::f64::consts::PI * e.iter().map(|v| dfact(*v as i64 - 1)).product::<f64>() / dfact(s + 1)
}

fn masses() -> Outcome {
    use std::f64::consts::PI;
    let mut worst = 0.0_f64;
    let mut note = |got: f64, want: f64| worst = worst.max((got - want).abs() / want.abs().max(1.0));
    note(sphere_area(3), 4.0 * PI);
    note(sphere_rule(3, 20).unwrap().weights.iter().sum(), 4.0 * PI);
    note(ball_mass(2, 0.0), 2.0 * PI);
    note(ball_mass(2, 0.5), PI);
    note(ball_rule(2, 0.0, 20).unwrap().weights.iter().sum(), 2.0 * PI);
    note(ball_rule(2, 0.5, 20).unwrap().weights.iter().sum(), PI);
    // Gauss–Legendre with n nodes integrates t^k exactly for k < 2n.
    let g = gauss_rule(GaussKind::Legendre, 8).unwrap();
    for k in 0..16 {
        let got: f64 = g.nodes.iter().zip(&g.weights).map(|(t, w)| w * t.powi(k)).sum();
        note(got, if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 });
    }
    // Jacobi (1−t)^a(1+t)^b against the beta integral, by a fine Legendre rule.
    let j = gauss_rule(GaussKind::Jacobi { a: 1.0, b: 2.0 }, 6).unwrap();
    let fine = gauss_rule(GaussKind::Legendre, 40).unwrap();
    for k in 0..12 {
        let got: f64 = j.nodes.iter().zip(&j.weights).map(|(t, w)| w * t.powi(k)).sum();
        let want: f64 = fine.nodes.iter().zip(&fine.weights).map(|(t, w)| w * (1.0 - t) * (1.0 + t).powi(2) * t.powi(k)).sum();
        note(got, want);
    }
    let rule = sphere_rule(3, 12).unwrap();
    for e in [[0, 0, 0], [2, 0, 0], [2, 2, 2], [4, 6, 2], [0, 0, 12]] {
        let got: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32))
            .sum();
        note(got, sphere_moment(e));
    }
    let toml = "[identity.parts]\npairs = 20\n[identity.lemma46]\npoints = 50\n";
    let a = to_json(&run(&["identity.parts", "identity.lemma46"], toml)).unwrap();
    let b = to_json(&run(&["identity.parts", "identity.lemma46"], toml)).unwrap();
    Outcome {
        pass: worst < 1e-10 && a == b,
        detail: format!("max relative error {worst:.1e}, identical JSON {}", a == b),
    }
}

fn main() -> std::process::ExitCode {
    let criteria: [(usize, &str, u64, fn() -> Outcome); 10] = [
        (1, "eigenvalue identity", 5, eigen),
        (2, "decomposition identities", 5, decomp),
        (3, "integration by parts", 5, parts),
        (4, "reproduction and commutation", 30, commute),
        (5, "ball derivative lemmas and two-route norms", 20, ball_lemmas),
        (6, "f_α modulus slope", 60, falpha),
        (7, "Jackson and inverse scans", 300, jackson),
        (8, "simultaneous approximation", 180, simultaneous),
        (9, "equivalence bands", 300, bands),
        (10, "masses, Gauss exactness, determinism", 5, masses),
    ];
    let mut unexpected = Vec::new();
    for (id, title, limit, check) in criteria {
        let t0 = Instant::now();
        let o = check();
        let took = t0.elapsed();
        let in_time = took <= Duration::from_secs(limit);
        let pass = o.pass && in_time;
        let known = UNATTAINABLE.iter().find(|(k, _)| *k == id);
        println!(
            "criterion {id:>2} {}: {title}: {} ({:.1} s of {limit} s)",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64()
        );
        match (pass, known) {
            (false, Some((_, why))) => println!("             known: {why}"),
            (false, None) => unexpected.push(id),
            _ => {}
        }
    }
    if unexpected.is_empty() {
        std::process::ExitCode::SUCCESS
    } else {
        eprintln!("criteria failed: {unexpected:?}");
        std::process::ExitCode::FAILURE
    }
}

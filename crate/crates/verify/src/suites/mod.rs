use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Config, Params};
use crate::error::{Result, VerifyError};
use crate::fit::{fit_constant, Fit};
use crate::report::{Case, Report};

mod ball;
mod identity;
mod sphere;

/// Shared state handed to every running suite.
#[derive(Debug, Clone, Copy)]
pub struct Ctx {
    pub seed: u64,
}

impl Ctx {
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

type Job = Box<dyn Fn(&Ctx) -> Vec<Case> + Send + Sync>;

/// A suite with its settings resolved.
pub struct Prepared {
    resolution: Value,
    job: Job,
}

impl Prepared {
    pub(crate) fn new(resolution: Value, job: impl Fn(&Ctx) -> Vec<Case> + Send + Sync + 'static) -> Self {
        Prepared { resolution, job: Box::new(job) }
    }
}

/// The settings as they appear in the report.
pub(crate) fn resolution<S: Serialize>(settings: &S) -> Value {
    serde_json::to_value(settings).expect("settings serialize")
}

pub struct SuiteDef {
    pub id: &'static str,
    /// The statement the suite checks.
    pub statement: &'static str,
    prepare: fn(&mut Params) -> Result<Prepared>,
}

pub static SUITES: [SuiteDef; 17] = [
    SuiteDef {
        id: "identity.eigen",
        statement: "spherical harmonics of degree n satisfy Δ_0 Y = −n(n+d−2) Y",
        prepare: identity::eigen,
    },
    SuiteDef {
        id: "identity.decomp",
        statement: "Σ_{i<j} D²_{i,j} equals Δ_0 and Σ_{i≤j} D²_{i,j} equals D_μ",
        prepare: identity::decomp,
    },
    SuiteDef {
        id: "identity.parts",
        statement: "∫ f D_{i,j} g dσ = −∫ D_{i,j} f · g dσ on the sphere",
        prepare: identity::parts,
    },
    SuiteDef {
        id: "identity.commute",
        statement: "V_n reproduces Π_n and commutes with D_{i,j}",
        prepare: identity::commute,
    },
    SuiteDef {
        id: "identity.lemma46",
        statement: "D^r_{i,d+1} f̃(s x, s φ(x)) = (−φ ∂_i)^r [f(s x)]",
        prepare: identity::lemma46,
    },
    SuiteDef {
        id: "identity.parity",
        statement: "D^r_{i,d+1} f̃ has the parity of r in x_{d+1}",
        prepare: identity::parity,
    },
    SuiteDef {
        id: "identity.prop48",
        statement: "norms of D^r_{i,d+1} g̃ equal weighted norms of (φ ∂_i)^r [g(s·)]",
        prepare: identity::prop48,
    },
    SuiteDef {
        id: "ineq.jackson.sphere",
        statement: "E_n(f)_p ≤ c ω_r(f, 1/n)_p on the sphere",
        prepare: sphere::jackson,
    },
    SuiteDef {
        id: "ineq.inverse.sphere",
        statement: "ω_r(f, 1/n)_p ≤ c n^{−r} Σ_{k≤n} k^{r−1} E_{k−1}(f)_p on the sphere",
        prepare: sphere::inverse,
    },
    SuiteDef {
        id: "ineq.equiv.kmod",
        statement: "ω_r(f, t)_p ~ K_r(f, t)_p on the sphere and the ball",
        prepare: sphere::kmod,
    },
    SuiteDef {
        id: "ineq.simul.sphere",
        statement: "‖D^r_{i,j}(f − V_n f)‖_p ≤ c E_n(D^r_{i,j} f)_p and E_{2n}(f)_p ≤ c n^{−r} max E_n(D^r_{i,j} f)_p",
        prepare: sphere::simul,
    },
    SuiteDef {
        id: "ineq.jackson.ball",
        statement: "E_n(f)_{p,μ} ≤ c ω_r(f, 1/n)_{p,μ} and ω_r(f, 1/n)_{p,μ} ≤ c n^{−r} Σ_{k≤n} k^{r−1} E_k(f)_{p,μ}",
        prepare: ball::jackson,
    },
    SuiteDef {
        id: "ineq.thm44",
        statement: "K̂_1 ~ K_1, K_r ≤ c K̂_r + c t^r ‖f‖, and ‖D^{2r}_{i,i} g‖ ~ ‖φ^{2r} ∂_i^{2r} g‖, ‖D_μ g‖ ~ Σ ‖D²_{i,j} g‖ on the ball",
        prepare: ball::thm44,
    },
    SuiteDef {
        id: "ineq.simul.ball",
        statement: "‖D^r_{i,j}(f − V_n^μ f)‖_{p,μ} ≤ c E_n(D^r_{i,j} f)_{p,μ}",
        prepare: ball::simul,
    },
    SuiteDef {
        id: "scan.falpha",
        statement: "ω_r(f_α, t)_∞ ~ t^{2α} for f_α = (1 − ‖x‖² + ‖x − x_0‖²)^α on the ball",
        prepare: ball::falpha,
    },
    SuiteDef {
        id: "norms.lip.sphere",
        statement: "‖f‖_{W^{r,α}_p} ~ ‖f‖_{H^{r+α}_p} on the sphere",
        prepare: sphere::lip,
    },
    SuiteDef {
        id: "norms.lip.ball",
        statement: "‖f‖_{W^{r,α}_p(W_μ)} ~ ‖f‖_{H^{r+α}_p(W_μ)} on the ball",
        prepare: ball::lip,
    },
];

pub fn suite_ids() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.id).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: u64,
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
    /// Write `elapsed_ms = 0` so that reports are byte-identical across runs.
    pub stable: bool,
}

pub const DEFAULT_SEED: u64 = 20_240_607;

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { seed: DEFAULT_SEED, jobs: None, stable: false }
    }
}

/// Resolves `selector` (`all` or a suite id), validates every selected
/// suite's settings, then runs the suites in parallel. Reports come back in
/// registry order.
pub fn run_suites(selector: &str, cfg: &Config, opts: &RunOptions) -> Result<Vec<Report>> {
    let defs: Vec<&SuiteDef> = if selector == "all" {
        SUITES.iter().collect()
    } else {
        vec![SUITES.iter().find(|s| s.id == selector).ok_or_else(|| VerifyError::UnknownSuite(selector.into()))?]
    };
    let mut prepared = Vec::with_capacity(defs.len());
    for def in defs {
        let mut p = cfg.params(def.id);
        let job = (def.prepare)(&mut p)?;
        p.finish()?;
        prepared.push((def.id, job));
    }
    if opts.jobs == Some(0) {
        return Err(VerifyError::config("--jobs must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.unwrap_or(0))
        .build()
        .map_err(|e| VerifyError::config(e.to_string()))?;
    let ctx = Ctx { seed: opts.seed };
    Ok(pool.install(|| {
        prepared
            .par_iter()
            .map(|(id, p)| {
                let start = Instant::now();
                let cases = (p.job)(&ctx);
                let ms = if opts.stable { 0 } else { start.elapsed().as_millis() as u64 };
                Report::new(id, cases, p.resolution.clone(), opts.seed, ms)
            })
            .collect()
    }))
}

/// Runs `f`, turning a numerical error into a failed case.
pub(crate) fn guard(name: &str, f: impl FnOnce() -> sphereball::Result<Vec<Case>>) -> Vec<Case> {
    f().unwrap_or_else(|e| vec![Case::failed(name, e)])
}

/// Criteria of a ratio scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub(crate) struct TrendCriteria {
    /// Largest allowed `|slope|` (two-sided), or growth rate of the ratio
    /// toward the asymptotic end (`n → ∞`, `t → 0`) when one-sided.
    pub max_slope: f64,
    /// Largest allowed `max/min` of the ratios; `None` skips the check.
    pub max_spread: Option<f64>,
    pub two_sided: bool,
}

impl TrendCriteria {
    /// `toward` is `1` when the asymptotic end is large `x` and `-1` when it is small `x`.
    pub fn accepts(&self, fit: &Fit, toward: f64) -> bool {
        let slope_ok = if self.two_sided { fit.slope.abs() < self.max_slope } else { toward * fit.slope < self.max_slope };
        let spread_ok = self.max_spread.is_none_or(|m| fit.spread() < m);
        slope_ok && spread_ok && fit.c.is_finite()
    }
}

/// One scan point: `lhs ≤ c rhs` at abscissa `x`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScanPoint {
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Emits one case per scan point and a fit case over the points whose
/// quantities are not exact zeros (`≤ zero_tol`). Scans with fewer than two
/// usable points produce no fit case.
pub(crate) fn scan_cases(
    name: &str,
    xkey: &str,
    points: &[ScanPoint],
    zero_tol: f64,
    crit: &TrendCriteria,
) -> Vec<Case> {
    let mut out = Vec::new();
    let mut pairs = Vec::new();
    let mut xs = Vec::new();
    for p in points {
        let exact = p.lhs <= zero_tol || p.rhs <= zero_tol;
        let finite = p.lhs.is_finite() && p.rhs.is_finite();
        let mut c = Case::new(format!("{name}/{xkey}={}", p.x), p.lhs, p.rhs, finite).with(xkey, p.x);
        if exact {
            c = c.with("excluded", "exact zero");
        } else if finite {
            pairs.push((p.lhs, p.rhs));
            xs.push(p.x);
        }
        out.push(c);
    }
    let toward = if xkey == "t" { -1.0 } else { 1.0 };
    if pairs.len() >= 2 {
        match fit_constant(&pairs, &xs) {
            Ok(fit) => out.push(Case::fitted(format!("{name}/fit"), &fit, crit.accepts(&fit, toward)).with("points", pairs.len())),
            Err(e) => out.push(Case::failed(format!("{name}/fit"), e)),
        }
    }
    out
}

/// Fit case of a two-quantity equivalence: the band `[1/c, c]` holds every
/// ratio, with `c` reported as `fitted_c`.
pub(crate) fn band_cases(name: &str, xkey: &str, points: &[ScanPoint], zero_tol: f64, max_slope: f64) -> Vec<Case> {
    let crit = TrendCriteria { max_slope, max_spread: None, two_sided: true };
    let mut out = scan_cases(name, xkey, points, zero_tol, &crit);
    if let Some(last) = out.last_mut().filter(|c| c.fitted_c.is_some()) {
        let (max, min) = (last.lhs, last.rhs);
        last.fitted_c = Some(max.max(1.0 / min));
    }
    out
}

pub(crate) fn planes(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect()
}

pub(crate) fn p_label(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

pub(crate) fn check_ns(ns: &[usize], what: &str) -> Result<()> {
    if ns.iter().any(|n| *n == 0) {
        return Err(VerifyError::config(format!("`{what}` entries must be positive")));
    }
    Ok(())
}

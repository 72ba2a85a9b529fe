use std::f64::consts::E;

use serde::Serialize;
use sphereball::{Domain, FnHandle, MultiPoly};

use crate::error::{Result, VerifyError};

/// What is known about a corpus function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Class {
    Polynomial { degree: u32 },
    /// `|x_d|`: Lipschitz with a derivative jump across a great circle or hyperplane.
    Abs,
    /// `(1 − ‖x‖² + ‖x − e_1‖²)^α`, `1/2 < α < 1`.
    FAlpha { alpha: f64 },
    /// Compactly supported `C^∞` bump.
    Bump,
}

impl Class {
    pub fn is_smooth(&self) -> bool {
        matches!(self, Class::Polynomial { .. } | Class::Bump)
    }
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub class: Class,
    pub handle: FnHandle,
}

impl CorpusEntry {
    pub fn domain(&self) -> Domain {
        self.handle.domain()
    }
}

/// Default `α` of the boundary example.
pub const FALPHA_DEFAULT: f64 = 0.75;

pub const NAMES: [&str; 6] = ["poly3", "poly6", "poly12", "abs", "falpha", "bump"];

type Terms = &'static [(&'static [u32], f64)];

const SPHERE_POLYS: [(&str, Terms); 3] = [
    ("poly3", &[(&[3, 0, 0], 1.0), (&[1, 1, 1], -2.0), (&[0, 2, 0], 0.5), (&[0, 0, 1], 0.25)]),
    ("poly6", &[(&[2, 2, 2], 3.0), (&[6, 0, 0], 0.5), (&[0, 3, 1], -1.0), (&[1, 0, 4], 0.75), (&[0, 1, 0], 0.2)]),
    ("poly12", &[(&[4, 4, 4], 8.0), (&[12, 0, 0], 0.3), (&[0, 5, 7], -1.5), (&[3, 6, 0], 1.0), (&[0, 0, 2], -0.4)]),
];

const BALL_POLYS: [(&str, Terms); 3] = [
    ("poly3", &[(&[3, 0], 1.0), (&[1, 1], -2.0), (&[0, 2], 0.5), (&[0, 1], 0.25)]),
    ("poly6", &[(&[3, 3], 3.0), (&[6, 0], 0.5), (&[1, 3], -1.0), (&[0, 4], 0.75), (&[1, 0], 0.2)]),
    ("poly12", &[(&[6, 6], 8.0), (&[12, 0], 0.3), (&[5, 7], -1.5), (&[3, 6], 1.0), (&[0, 2], -0.4)]),
];

const BALL1_POLYS: [(&str, Terms); 3] = [
    ("poly3", &[(&[3], 1.0), (&[2], -2.0), (&[0], 0.5)]),
    ("poly6", &[(&[6], 3.0), (&[3], 0.5), (&[1], -1.0)]),
    ("poly12", &[(&[12], 8.0), (&[7], -1.5), (&[2], -0.4)]),
];

fn poly_entry(domain: Domain, name: &str, terms: Terms) -> CorpusEntry {
    let d = domain.dim();
    let p = MultiPoly::from_terms(d, terms.iter().map(|(e, c)| (e.to_vec(), *c)));
    let degree = p.degree();
    let handle = FnHandle::from_poly(domain, name, p).expect("corpus polynomials match their domain");
    CorpusEntry { name: name.to_string(), class: Class::Polynomial { degree }, handle }
}

/// `e · exp(−1/(1 − s²))` for `s < 1`, zero beyond; equals 1 at `s = 0`.
fn bump(s: f64) -> f64 {
    if s < 1.0 {
        E * (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

/// `f_α` on `B^d`, or its restriction to `S^{d-1}`, with `x_0 = e_1`.
pub fn falpha(domain: Domain, alpha: f64) -> Result<CorpusEntry> {
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(VerifyError::config(format!("f_α needs 1/2 < α < 1, got {alpha}")));
    }
    let d = domain.dim();
    let f = move |x: &[f64]| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let dist2: f64 = x.iter().enumerate().map(|(k, v)| if k == 0 { (v - 1.0).powi(2) } else { v * v }).sum();
        (1.0 - r2 + dist2).max(0.0).powf(alpha)
    };
    let mut e1 = vec![0.0; d];
    e1[0] = 1.0;
    let handle = FnHandle::new(domain, "falpha", f).with_meta("alpha", alpha).with_hotspot(e1);
    Ok(CorpusEntry { name: "falpha".into(), class: Class::FAlpha { alpha }, handle })
}

fn abs_entry(domain: Domain) -> CorpusEntry {
    let last = domain.dim() - 1;
    let handle = FnHandle::new(domain, "abs", move |x| x[last].abs());
    CorpusEntry { name: "abs".into(), class: Class::Abs, handle }
}

fn bump_entry(domain: Domain) -> CorpusEntry {
    let handle = match domain {
        Domain::Sphere(d) => FnHandle::new(domain, "bump", move |x| bump(1.0 - x[d - 1])),
        Domain::Ball(_) => FnHandle::new(domain, "bump", |x| {
            let c = [0.2, 0.1, 0.0];
            let s2: f64 = x.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum();
            bump(s2.sqrt() / 0.7)
        }),
    };
    CorpusEntry { name: "bump".into(), class: Class::Bump, handle }
}

/// The six corpus functions on `S^2` (`d = 3`), `B^1` or `B^2`.
pub fn corpus(domain: Domain) -> Result<Vec<CorpusEntry>> {
    let polys = match domain {
        Domain::Sphere(3) => &SPHERE_POLYS,
        Domain::Ball(2) => &BALL_POLYS,
        Domain::Ball(1) => &BALL1_POLYS,
        other => return Err(VerifyError::config(format!("no corpus on {other}"))),
    };
    let mut out: Vec<CorpusEntry> = polys.iter().map(|(n, t)| poly_entry(domain, n, t)).collect();
    out.push(abs_entry(domain));
    out.push(falpha(domain, FALPHA_DEFAULT)?);
    out.push(bump_entry(domain));
    Ok(out)
}

/// The entries named in `names`, in corpus order.
pub fn select(domain: Domain, names: &[String]) -> Result<Vec<CorpusEntry>> {
    if let Some(bad) = names.iter().find(|n| !NAMES.contains(&n.as_str())) {
        return Err(VerifyError::config(format!("unknown corpus entry `{bad}` (known: {})", NAMES.join(", "))));
    }
    Ok(corpus(domain)?.into_iter().filter(|e| names.iter().any(|n| *n == e.name)).collect())
}

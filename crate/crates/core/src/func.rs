use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::poly::{LinearMap, MultiPoly};

/// Where a function lives; the payload is the ambient dimension `d`
/// (`S^{d-1} ⊂ R^d` or `B^d ⊂ R^d`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Sphere(usize),
    Ball(usize),
}

impl Domain {
    pub fn dim(&self) -> usize {
        match *self {
            Domain::Sphere(d) | Domain::Ball(d) => d,
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match self {
            Domain::Sphere(_) => (r2.sqrt() - 1.0).abs() <= tol,
            Domain::Ball(_) => r2.sqrt() <= 1.0 + tol,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Sphere(d) => write!(f, "S^{}", d - 1),
            Domain::Ball(d) => write!(f, "B^{d}"),
        }
    }
}

type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A pointwise-evaluable real function with its domain, an optional exact
/// polynomial representation, and free-form numeric metadata (smoothness
/// exponents, degrees) used for reporting.
#[derive(Clone)]
pub struct FnHandle {
    domain: Domain,
    name: String,
    eval: Evaluator,
    poly: Option<Arc<MultiPoly>>,
    meta: Vec<(String, f64)>,
    hotspots: Vec<Vec<f64>>,
}

impl fmt::Debug for FnHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnHandle")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("polynomial", &self.poly.is_some())
            .field("meta", &self.meta)
            .finish()
    }
}

impl FnHandle {
    pub fn new(
        domain: Domain,
        name: impl Into<String>,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        FnHandle {
            domain,
            name: name.into(),
            eval: Arc::new(f),
            poly: None,
            meta: Vec::new(),
            hotspots: Vec::new(),
        }
    }

    pub fn from_poly(domain: Domain, name: impl Into<String>, p: MultiPoly) -> Result<Self> {
        check_dim(domain.dim(), p.dim())?;
        let p = Arc::new(p);
        let q = Arc::clone(&p);
        let degree = p.degree() as f64;
        Ok(FnHandle {
            domain,
            name: name.into(),
            eval: Arc::new(move |x| q.eval_unchecked(x)),
            poly: Some(p),
            meta: vec![("degree".to_string(), degree)],
            hotspots: Vec::new(),
        })
    }

    pub fn constant(domain: Domain, c: f64) -> Self {
        let p = MultiPoly::constant(domain.dim(), c);
        Self::from_poly(domain, format!("const({c})"), p).expect("dimension matches by construction")
    }

    pub fn with_meta(mut self, key: &str, value: f64) -> Self {
        self.meta.retain(|(k, _)| k != key);
        self.meta.push((key.to_string(), value));
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Marks a point where the function is singular; suprema searches start
    /// there in addition to the quadrature nodes.
    pub fn with_hotspot(mut self, point: Vec<f64>) -> Self {
        self.hotspots.push(point);
        self
    }

    pub fn hotspots(&self) -> &[Vec<f64>] {
        &self.hotspots
    }

    pub fn meta(&self, key: &str) -> Option<f64> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn metadata(&self) -> &[(String, f64)] {
        &self.meta
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn poly(&self) -> Option<&MultiPoly> {
        self.poly.as_deref()
    }

    /// Checked evaluation: dimension must match and the value must be finite.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.eval_node(0, x)
    }

    /// Like [`FnHandle::eval`] but tags a failure with a quadrature node index.
    pub fn eval_node(&self, node: usize, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let v = (self.eval)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { node, value: v })
        }
    }

    /// Unchecked evaluation for inner loops whose inputs are known to be valid.
    #[inline]
    pub fn call(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    /// Evaluates at every point, reporting the first failing node.
    pub fn eval_many(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        points.iter().enumerate().map(|(k, x)| self.eval_node(k, x)).collect()
    }

    pub fn sub(&self, other: &FnHandle) -> Result<FnHandle> {
        self.combine(other, 1.0, -1.0, "-")
    }

    pub fn add(&self, other: &FnHandle) -> Result<FnHandle> {
        self.combine(other, 1.0, 1.0, "+")
    }

    fn combine(&self, other: &FnHandle, a: f64, b: f64, op: &str) -> Result<FnHandle> {
        if self.domain != other.domain {
            return Err(Error::usage(format!(
                "cannot combine functions on {} and {}",
                self.domain, other.domain
            )));
        }
        let name = format!("({}{op}{})", self.name, other.name);
        if let (Some(p), Some(q)) = (self.poly(), other.poly()) {
            return FnHandle::from_poly(self.domain, name, &p.scale(a) + &q.scale(b));
        }
        let (f, g) = (Arc::clone(&self.eval), Arc::clone(&other.eval));
        Ok(FnHandle::new(self.domain, name, move |x| a * f(x) + b * g(x)))
    }

    pub fn scale(&self, c: f64) -> FnHandle {
        let name = format!("{c}*{}", self.name);
        if let Some(p) = self.poly() {
            return FnHandle::from_poly(self.domain, name, p.scale(c)).expect("same dimension");
        }
        let f = Arc::clone(&self.eval);
        FnHandle::new(self.domain, name, move |x| c * f(x))
    }

    /// `x ↦ f(Qx)`; exact on polynomial handles.
    pub fn compose_linear(&self, q: &LinearMap) -> Result<FnHandle> {
        check_dim(self.dim(), q.dim())?;
        let name = format!("{}∘Q", self.name);
        if let Some(p) = self.poly() {
            return FnHandle::from_poly(self.domain, name, crate::poly::rot_compose(p, q)?);
        }
        let f = Arc::clone(&self.eval);
        let q = q.clone();
        Ok(FnHandle::new(self.domain, name, move |x| f(&q.apply_unchecked(x))))
    }

    /// The function of `d + extra` variables that ignores the trailing ones,
    /// living on `target`. Used for the trivial extension to `B^{d+1}` and for
    /// lifting ball functions to `S^{d+m-1}`.
    pub fn extend_trailing(&self, target: Domain) -> Result<FnHandle> {
        let d = self.dim();
        if target.dim() < d {
            return Err(Error::usage(format!(
                "cannot extend a function of {d} variables to {target}"
            )));
        }
        let name = format!("ext({})", self.name);
        let mut out = if let Some(p) = self.poly() {
            FnHandle::from_poly(target, name, p.extend_dim(target.dim()))?
        } else {
            let f = Arc::clone(&self.eval);
            FnHandle::new(target, name, move |x| f(&x[..d]))
        };
        out.meta = self.meta.clone();
        out.hotspots = self.hotspots.iter().map(|h| {
            let mut v = h.clone();
            v.resize(target.dim(), 0.0);
            v
        }).collect();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_and_closure_agree() {
        let p = &MultiPoly::var(3, 0) * &MultiPoly::var(3, 1);
        let h = FnHandle::from_poly(Domain::Sphere(3), "x1x2", p).unwrap();
        let g = FnHandle::new(Domain::Sphere(3), "x1x2", |x| x[0] * x[1]);
        let x = [0.6, 0.8, 0.0];
        assert_eq!(h.eval(&x).unwrap(), g.eval(&x).unwrap());
        assert!(h.eval(&[1.0, 0.0]).is_err());
        let d = h.sub(&g).unwrap();
        assert!(d.poly().is_none());
        assert!(d.eval(&x).unwrap().abs() < 1e-15);
    }

    #[test]
    fn nonfinite_values_are_reported() {
        let f = FnHandle::new(Domain::Ball(1), "log", |x| x[0].ln());
        assert!(matches!(f.eval_node(7, &[-1.0]), Err(Error::Evaluation { node: 7, .. })));
    }

    #[test]
    fn trailing_extension_ignores_new_variables() {
        let f = FnHandle::new(Domain::Ball(2), "f", |x| x[0] + 2.0 * x[1]);
        let ft = f.extend_trailing(Domain::Ball(3)).unwrap();
        assert_eq!(ft.eval(&[0.1, 0.2, 0.9]).unwrap(), ft.eval(&[0.1, 0.2, -0.3]).unwrap());
        let p = FnHandle::from_poly(Domain::Ball(2), "x1", MultiPoly::var(2, 0)).unwrap();
        let pt = p.extend_trailing(Domain::Sphere(3)).unwrap();
        assert_eq!(pt.poly().unwrap().dim(), 3);
        assert!(p.extend_trailing(Domain::Ball(1)).is_err());
    }
}

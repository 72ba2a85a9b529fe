//! Dense multivariate polynomials over `f64` and the angular/ball differential
//! operators realized as exact polynomial-to-polynomial maps.
//!
//! Indices are zero-based throughout: `dij(p, 0, 1)` is the operator
//! `x_2 ∂_1 − x_1 ∂_2` written with one-based coordinates.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{check_dim, Error, Result};

/// Exponent multi-index, one entry per variable.
pub type Exponent = Vec<u32>;

/// A polynomial in `dim` real variables stored as a map from exponent
/// multi-indices to coefficients.
///
/// Coefficients whose magnitude is at most `prune` are dropped after every
/// operation (the default threshold is zero, i.e. only exact zeros go).
#[derive(Clone, PartialEq)]
pub struct MultiPoly {
    dim: usize,
    terms: BTreeMap<Exponent, f64>,
    degree: u32,
    prune: f64,
}

impl MultiPoly {
    pub fn zero(dim: usize) -> Self {
        MultiPoly {
            dim,
            terms: BTreeMap::new(),
            degree: 0,
            prune: 0.0,
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::monomial(dim, vec![0; dim], c)
    }

    /// The coordinate function `x_i`.
    pub fn var(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Self::monomial(dim, e, 1.0)
    }

    pub fn monomial(dim: usize, exponent: Exponent, c: f64) -> Self {
        assert_eq!(exponent.len(), dim, "exponent length must equal dim");
        let mut p = Self::zero(dim);
        p.add_term(exponent, c);
        p.normalize();
        p
    }

    /// `‖x‖² = Σ x_i²`.
    pub fn norm_sq(dim: usize) -> Self {
        let mut p = Self::zero(dim);
        for i in 0..dim {
            let mut e = vec![0; dim];
            e[i] = 2;
            p.add_term(e, 1.0);
        }
        p.normalize();
        p
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Exponent, f64)>) -> Self {
        let mut p = Self::zero(dim);
        for (e, c) in terms {
            assert_eq!(e.len(), dim, "exponent length must equal dim");
            p.add_term(e, c);
        }
        p.normalize();
        p
    }

    /// Sets the prune threshold and re-applies it.
    pub fn with_prune(mut self, threshold: f64) -> Self {
        self.prune = threshold.max(0.0);
        self.normalize();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, f64)> {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn coeff(&self, exponent: &[u32]) -> f64 {
        self.terms.get(exponent).copied().unwrap_or(0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn add_term(&mut self, exponent: Exponent, c: f64) {
        if c == 0.0 {
            return;
        }
        *self.terms.entry(exponent).or_insert(0.0) += c;
    }

    fn normalize(&mut self) {
        let prune = self.prune;
        self.terms.retain(|_, c| c.abs() > prune && *c != 0.0);
        self.degree = self
            .terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0);
    }

    fn same_dim(&self, other: &Self) {
        assert_eq!(self.dim, other.dim, "polynomial dimensions differ");
    }

    /// Evaluates `Σ c_α x^α`, accumulating each monomial from cached powers.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        let deg = self.degree as usize;
        let powers: Vec<Vec<f64>> = x
            .iter()
            .map(|&xi| {
                let mut p = Vec::with_capacity(deg + 1);
                let mut acc = 1.0;
                for _ in 0..=deg {
                    p.push(acc);
                    acc *= xi;
                }
                p
            })
            .collect();
        self.terms
            .iter()
            .map(|(e, &c)| {
                e.iter()
                    .enumerate()
                    .fold(c, |acc, (i, &k)| acc * powers[i][k as usize])
            })
            .sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = Self::zero(self.dim);
        p.prune = self.prune;
        for (e, &c) in &self.terms {
            p.add_term(e.clone(), c * s);
        }
        p.normalize();
        p
    }

    /// Multiplies by the monomial `x_i`.
    pub fn mul_var(&self, i: usize) -> Self {
        let mut p = Self::zero(self.dim);
        p.prune = self.prune;
        for (e, &c) in &self.terms {
            let mut e = e.clone();
            e[i] += 1;
            p.add_term(e, c);
        }
        p.normalize();
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.dim, 1.0);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// `∂p/∂x_i`.
    pub fn partial(&self, i: usize) -> Result<Self> {
        if i >= self.dim {
            return Err(Error::usage(format!(
                "variable index {i} out of range for dim {}",
                self.dim
            )));
        }
        let mut p = Self::zero(self.dim);
        p.prune = self.prune;
        for (e, &c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            p.add_term(e2, c * e[i] as f64);
        }
        p.normalize();
        Ok(p)
    }

    /// Euclidean Laplacian `Σ ∂_i²`.
    pub fn laplacian(&self) -> Self {
        let mut acc = Self::zero(self.dim);
        for i in 0..self.dim {
            let d2 = self.partial(i).and_then(|q| q.partial(i)).expect("index in range");
            acc = &acc + &d2;
        }
        acc
    }

    /// Euler operator `Σ x_i ∂_i`, which multiplies each homogeneous part by its degree.
    pub fn euler(&self) -> Self {
        let mut p = Self::zero(self.dim);
        p.prune = self.prune;
        for (e, &c) in &self.terms {
            let k: u32 = e.iter().sum();
            p.add_term(e.clone(), c * k as f64);
        }
        p.normalize();
        p
    }

    /// Homogeneous component of degree `k`.
    pub fn homogeneous_part(&self, k: u32) -> Self {
        let mut p = Self::zero(self.dim);
        p.prune = self.prune;
        for (e, &c) in &self.terms {
            if e.iter().sum::<u32>() == k {
                p.add_term(e.clone(), c);
            }
        }
        p.normalize();
        p
    }

    /// Replaces every homogeneous part of degree `n − 2j` by itself times
    /// `‖x‖^{2j}`, producing a degree-`n` homogeneous polynomial that agrees
    /// with `self` on the unit sphere. Parts whose degree has the wrong parity
    /// (or exceeds `n`) make this impossible and are reported.
    pub fn homogenize_on_sphere(&self, n: u32) -> Result<Self> {
        let r2 = Self::norm_sq(self.dim);
        let mut acc = Self::zero(self.dim);
        for k in 0..=self.degree {
            let part = self.homogeneous_part(k);
            if part.is_zero() {
                continue;
            }
            if k > n || (n - k) % 2 != 0 {
                return Err(Error::usage(format!(
                    "homogeneous part of degree {k} cannot be lifted to degree {n}"
                )));
            }
            acc = &acc + &(&part * &r2.pow((n - k) / 2));
        }
        Ok(acc)
    }

    /// `x ↦ p(s x)`.
    pub fn scale_argument(&self, s: f64) -> Self {
        let mut p = Self::zero(self.dim);
        p.prune = self.prune;
        for (e, &c) in &self.terms {
            let k: u32 = e.iter().sum();
            p.add_term(e.clone(), c * s.powi(k as i32));
        }
        p.normalize();
        p
    }

    /// Embeds into `new_dim ≥ dim` variables; the extra variables do not appear.
    pub fn extend_dim(&self, new_dim: usize) -> Self {
        assert!(new_dim >= self.dim);
        let mut p = Self::zero(new_dim);
        p.prune = self.prune;
        for (e, &c) in &self.terms {
            let mut e2 = e.clone();
            e2.resize(new_dim, 0);
            p.add_term(e2, c);
        }
        p.normalize();
        p
    }

    /// Substitutes `x_i ↦ linear_forms[i]`; all forms must share one dimension.
    pub fn substitute(&self, linear_forms: &[MultiPoly]) -> Result<Self> {
        check_dim(self.dim, linear_forms.len())?;
        let out_dim = linear_forms.first().map(|l| l.dim).unwrap_or(0);
        let deg = self.degree;
        let powers: Vec<Vec<MultiPoly>> = linear_forms
            .iter()
            .map(|l| {
                let mut v = vec![MultiPoly::constant(out_dim, 1.0)];
                for k in 1..=deg as usize {
                    let next = &v[k - 1] * l;
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = MultiPoly::zero(out_dim);
        for (e, &c) in &self.terms {
            let mut term = MultiPoly::constant(out_dim, c);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = &term * &powers[i][k as usize];
                }
            }
            acc = &acc + &term;
        }
        acc.prune = self.prune;
        acc.normalize();
        Ok(acc)
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, k)?,
                }
            }
        }
        Ok(())
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.same_dim(rhs);
        let mut p = self.clone();
        for (e, &c) in &rhs.terms {
            p.add_term(e.clone(), c);
        }
        p.normalize();
        p
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.same_dim(rhs);
        let mut p = self.clone();
        for (e, &c) in &rhs.terms {
            p.add_term(e.clone(), -c);
        }
        p.normalize();
        p
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.same_dim(rhs);
        let mut p = MultiPoly::zero(self.dim);
        p.prune = self.prune.max(rhs.prune);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &rhs.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                p.add_term(e, ca * cb);
            }
        }
        p.normalize();
        p
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(-1.0)
    }
}

impl Add for MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: MultiPoly) -> MultiPoly {
        &self + &rhs
    }
}

impl Sub for MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: MultiPoly) -> MultiPoly {
        &self - &rhs
    }
}

impl Mul for MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: MultiPoly) -> MultiPoly {
        &self * &rhs
    }
}

/// A real `dim × dim` matrix acting on points by `x ↦ M x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    dim: usize,
    /// Row-major entries.
    entries: Vec<f64>,
}

impl LinearMap {
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        check_dim(dim * dim, entries.len())?;
        Ok(LinearMap { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        LinearMap { dim, entries }
    }

    /// Rotation by `t` in the `(x_i, x_j)` plane carrying `e_i` towards `e_j`:
    /// `x_i ↦ x_i cos t − x_j sin t`, `x_j ↦ x_i sin t + x_j cos t`.
    pub fn plane_rotation(dim: usize, i: usize, j: usize, t: f64) -> Result<Self> {
        if i == j || i >= dim || j >= dim {
            return Err(Error::usage(format!(
                "rotation plane ({i}, {j}) invalid for dim {dim}"
            )));
        }
        let mut m = Self::identity(dim);
        let (s, c) = t.sin_cos();
        m.entries[i * dim + i] = c;
        m.entries[i * dim + j] = -s;
        m.entries[j * dim + i] = s;
        m.entries[j * dim + j] = c;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.entry(r, c) * x[c]).sum())
            .collect()
    }

    pub fn determinant(&self) -> f64 {
        // Gaussian elimination with partial pivoting on a copy.
        let n = self.dim;
        let mut a = self.entries.clone();
        let mut det = 1.0;
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&r1, &r2| a[r1 * n + col].abs().total_cmp(&a[r2 * n + col].abs()))
                .unwrap();
            if a[piv * n + col] == 0.0 {
                return 0.0;
            }
            if piv != col {
                for c in 0..n {
                    a.swap(piv * n + c, col * n + c);
                }
                det = -det;
            }
            det *= a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / a[col * n + col];
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
            }
        }
        det
    }
}

/// `p ∘ Q`, i.e. the polynomial `x ↦ p(Qx)` expanded in monomials.
pub fn rot_compose(p: &MultiPoly, q: &LinearMap) -> Result<MultiPoly> {
    check_dim(p.dim(), q.dim())?;
    let d = q.dim();
    let forms: Vec<MultiPoly> = (0..d)
        .map(|r| {
            MultiPoly::from_terms(
                d,
                (0..d).map(|c| {
                    let mut e = vec![0; d];
                    e[c] = 1;
                    (e, q.entry(r, c))
                }),
            )
        })
        .collect();
    p.substitute(&forms)
}

fn check_pair(dim: usize, i: usize, j: usize) -> Result<()> {
    if i == j || i >= dim || j >= dim {
        Err(Error::usage(format!(
            "operator indices ({i}, {j}) invalid for dim {dim}"
        )))
    } else {
        Ok(())
    }
}

/// The angular derivative `D_{i,j} p = x_j ∂_i p − x_i ∂_j p`.
pub fn dij_poly(p: &MultiPoly, i: usize, j: usize) -> Result<MultiPoly> {
    check_pair(p.dim(), i, j)?;
    let a = p.partial(i)?.mul_var(j);
    let b = p.partial(j)?.mul_var(i);
    Ok(&a - &b)
}

/// `D_{i,j}^r p`.
pub fn dij_pow_poly(p: &MultiPoly, i: usize, j: usize, r: u32) -> Result<MultiPoly> {
    let mut q = p.clone();
    for _ in 0..r {
        q = dij_poly(&q, i, j)?;
    }
    Ok(q)
}

/// Laplace-Beltrami operator as the sum of squared angular derivatives
/// `Σ_{i<j} D_{i,j}² p`.
pub fn laplace_beltrami_poly(p: &MultiPoly) -> Result<MultiPoly> {
    let d = p.dim();
    if d < 2 {
        return Err(Error::usage("Laplace-Beltrami operator needs dim ≥ 2"));
    }
    let mut acc = MultiPoly::zero(d);
    for i in 0..d {
        for j in i + 1..d {
            acc = &acc + &dij_pow_poly(p, i, j, 2)?;
        }
    }
    Ok(acc)
}

/// Laplace-Beltrami action obtained from the radial definition
/// `Δ[f(y/‖y‖)]` instead of angular derivatives: each homogeneous part `p_n`
/// contributes `‖x‖² Δp_n − n(n+d−2) p_n`, which is the degree-`n`
/// homogeneous polynomial that agrees with `Δ_0 p_n` on the sphere.
pub fn laplace_beltrami_radial(p: &MultiPoly) -> Result<MultiPoly> {
    let d = p.dim();
    if d < 2 {
        return Err(Error::usage("Laplace-Beltrami operator needs dim ≥ 2"));
    }
    let r2 = MultiPoly::norm_sq(d);
    let mut acc = MultiPoly::zero(d);
    for n in 0..=p.degree() {
        let part = p.homogeneous_part(n);
        if part.is_zero() {
            continue;
        }
        let ev = (n * (n + d as u32 - 2)) as f64;
        acc = &acc + &(&(&r2 * &part.laplacian()) - &part.scale(ev));
    }
    Ok(acc)
}

/// The ball operator
/// `D_μ = Σ(1−x_i²)∂_i² − 2Σ_{i<j} x_i x_j ∂_i∂_j − (d+2μ) Σ x_i ∂_i`.
pub fn dmu_poly(p: &MultiPoly, mu: f64) -> Result<MultiPoly> {
    let d = p.dim();
    if d < 1 {
        return Err(Error::usage("D_mu needs dim ≥ 1"));
    }
    let first: Vec<MultiPoly> = (0..d).map(|i| p.partial(i)).collect::<Result<_>>()?;
    let mut acc = MultiPoly::zero(d);
    for i in 0..d {
        let dii = first[i].partial(i)?;
        acc = &acc + &(&dii - &dii.mul_var(i).mul_var(i));
        for j in i + 1..d {
            let dij = first[i].partial(j)?;
            acc = &acc - &dij.mul_var(i).mul_var(j).scale(2.0);
        }
    }
    let euler = p.euler();
    Ok(&acc - &euler.scale(d as f64 + 2.0 * mu))
}

/// `D_{i,i}² p = (1 − ‖x‖²) ∂_i² p − (2μ+1) x_i ∂_i p`.
pub fn dii_sq_poly(p: &MultiPoly, i: usize, mu: f64) -> Result<MultiPoly> {
    let d = p.dim();
    if i >= d {
        return Err(Error::usage(format!("index {i} out of range for dim {d}")));
    }
    let di = p.partial(i)?;
    let dii = di.partial(i)?;
    let one_minus_r2 = &MultiPoly::constant(d, 1.0) - &MultiPoly::norm_sq(d);
    Ok(&(&one_minus_r2 * &dii) - &di.mul_var(i).scale(2.0 * mu + 1.0))
}

/// All monomials `x^α` in `dim` variables with `|α| ≤ max_degree`, in a
/// deterministic order.
pub fn monomials_up_to(dim: usize, max_degree: u32) -> Vec<MultiPoly> {
    let mut out = Vec::new();
    let mut e = vec![0u32; dim];
    fn rec(i: usize, left: u32, e: &mut Vec<u32>, out: &mut Vec<MultiPoly>) {
        if i == e.len() {
            out.push(MultiPoly::monomial(e.len(), e.clone(), 1.0));
            return;
        }
        for k in 0..=left {
            e[i] = k;
            rec(i + 1, left - k, e, out);
        }
        e[i] = 0;
    }
    rec(0, max_degree, &mut e, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn x(d: usize, i: usize) -> MultiPoly {
        MultiPoly::var(d, i)
    }

    #[test]
    fn eval_basics() {
        let p = &x(3, 0) * &x(3, 1);
        assert_eq!(p.eval(&[1.0, 2.0, 0.0]).unwrap(), 2.0);
        assert_eq!(MultiPoly::zero(3).eval(&[0.3, 0.1, 9.0]).unwrap(), 0.0);
        let q = &MultiPoly::constant(3, 1.0) - &MultiPoly::norm_sq(3);
        assert_abs_diff_eq!(q.eval(&[0.6, 0.8, 0.0]).unwrap(), 0.0, epsilon = 1e-15);
        assert!(matches!(
            p.eval(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn degree_and_pruning() {
        let p = &x(2, 0) - &x(2, 0);
        assert!(p.is_zero());
        assert_eq!(p.degree(), 0);
        let q = MultiPoly::from_terms(2, [(vec![3, 1], 1e-14), (vec![1, 0], 1.0)]);
        assert_eq!(q.degree(), 4);
        assert_eq!(q.with_prune(1e-12).degree(), 1);
    }

    #[test]
    fn dij_examples() {
        let d12 = dij_poly(&x(3, 0), 0, 1).unwrap();
        assert_eq!(d12, x(3, 1));
        let r2 = &(&x(3, 0) * &x(3, 0)) + &(&x(3, 1) * &x(3, 1));
        assert!(dij_poly(&r2, 0, 1).unwrap().is_zero());
        let p = &x(3, 0) * &x(3, 1);
        let d2 = dij_pow_poly(&p, 0, 1, 2).unwrap();
        assert_eq!(d2, p.scale(-4.0));
        assert!(dij_poly(&p, 1, 1).is_err());
        assert!(dij_poly(&p, 0, 3).is_err());
    }

    #[test]
    fn dij_squared_matches_rotation_angle_second_derivative() {
        // t ↦ p(Q_{1,2,−t} x) has second derivative D_{1,2}² p(x) at t = 0.
        let p = &x(3, 0) * &x(3, 1);
        let pt = [0.3, -0.5, 0.2];
        let h = 1e-3;
        let g = |t: f64| {
            let q = LinearMap::plane_rotation(3, 0, 1, -t).unwrap();
            p.eval(&q.apply(&pt).unwrap()).unwrap()
        };
        let fd = (g(h) - 2.0 * g(0.0) + g(-h)) / (h * h);
        let exact = -4.0 * pt[0] * pt[1];
        assert_abs_diff_eq!(fd, exact, epsilon = 1e-6);
    }

    #[test]
    fn laplace_beltrami_examples() {
        let p = &x(3, 0) * &x(3, 1);
        assert_eq!(laplace_beltrami_poly(&p).unwrap(), p.scale(-6.0));
        assert!(laplace_beltrami_poly(&MultiPoly::constant(3, 2.5))
            .unwrap()
            .is_zero());
        assert_eq!(laplace_beltrami_poly(&x(3, 0)).unwrap(), x(3, 0).scale(-2.0));
    }

    #[test]
    fn dmu_examples() {
        assert!(dmu_poly(&MultiPoly::constant(2, 1.0), 0.5).unwrap().is_zero());
        assert_eq!(dmu_poly(&x(2, 0), 0.5).unwrap(), x(2, 0).scale(-3.0));
        // Term-by-term oracle for x_1 x_2, d = 3, μ = 0:
        // (1-x1²)·0 + (1-x2²)·0 − 2·x1x2·1 − 3·(x1x2 + x1x2) = −8 x1x2.
        let p = &x(3, 0) * &x(3, 1);
        assert_eq!(dmu_poly(&p, 0.0).unwrap(), p.scale(-8.0));
    }

    #[test]
    fn dii_examples() {
        let mu = 0.5;
        assert_eq!(
            dii_sq_poly(&x(3, 0), 0, mu).unwrap(),
            x(3, 0).scale(-(2.0 * mu + 1.0))
        );
        assert!(dii_sq_poly(&MultiPoly::constant(3, 4.0), 1, mu)
            .unwrap()
            .is_zero());
        let p = &(&x(3, 0) * &x(3, 0)) * &x(3, 2);
        let mut sum = MultiPoly::zero(3);
        for i in 0..3 {
            sum = &sum + &dii_sq_poly(&p, i, mu).unwrap();
            for j in i + 1..3 {
                sum = &sum + &dij_pow_poly(&p, i, j, 2).unwrap();
            }
        }
        let diff = &sum - &dmu_poly(&p, mu).unwrap();
        assert!(diff.max_abs_coeff() < 1e-12);
    }

    #[test]
    fn rot_compose_examples() {
        let q = LinearMap::plane_rotation(3, 0, 1, std::f64::consts::FRAC_PI_2).unwrap();
        let p = rot_compose(&x(3, 0), &q).unwrap();
        assert_abs_diff_eq!(p.eval(&[1.0, 0.0, 0.0]).unwrap(), 0.0, epsilon = 1e-15);
        let id = rot_compose(&x(3, 2), &LinearMap::identity(3)).unwrap();
        assert_eq!(id, x(3, 2));
        let r2 = &(&x(3, 0) * &x(3, 0)) + &(&x(3, 1) * &x(3, 1));
        let q = LinearMap::plane_rotation(3, 0, 1, 0.7).unwrap();
        let rr = rot_compose(&r2, &q).unwrap().with_prune(1e-14);
        assert!((&rr - &r2).max_abs_coeff() < 1e-14);
    }

    #[test]
    fn rotation_maps_ei_to_ej() {
        let q = LinearMap::plane_rotation(3, 0, 1, std::f64::consts::FRAC_PI_2).unwrap();
        let y = q.apply(&[1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(y[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.determinant(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn homogenize_agrees_on_sphere() {
        let p = &(&x(3, 0) * &x(3, 1)) + &MultiPoly::constant(3, 0.5);
        let h = p.homogenize_on_sphere(2).unwrap();
        let pt = [0.6, 0.0, 0.8];
        assert_abs_diff_eq!(h.eval(&pt).unwrap(), p.eval(&pt).unwrap(), epsilon = 1e-15);
        assert!(x(3, 0).homogenize_on_sphere(2).is_err());
    }

    #[test]
    fn monomial_count() {
        // C(8+3, 3) = 165 monomials of degree ≤ 8 in three variables.
        assert_eq!(monomials_up_to(3, 8).len(), 165);
    }
}

use crate::error::{Result, VerifyError};

/// Empirical constant of `lhs ≤ c · rhs` over a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    /// `max lhs/rhs`.
    pub c: f64,
    /// Least-squares slope of `log(lhs/rhs)` against `log x`.
    pub slope: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl Fit {
    /// `max/min` of the ratios.
    pub fn spread(&self) -> f64 {
        self.max_ratio / self.min_ratio
    }

    /// Half-width of the two-sided band `[1/c, c]` containing every ratio.
    pub fn band(&self) -> f64 {
        self.max_ratio.max(1.0 / self.min_ratio)
    }
}

/// Fits `c = max(lhs/rhs)` and the trend of the ratio against `x` (`n` or `t`).
pub fn fit_constant(pairs: &[(f64, f64)], xs: &[f64]) -> Result<Fit> {
    if pairs.is_empty() {
        return Err(VerifyError::Fit("no pairs to fit".into()));
    }
    if pairs.len() != xs.len() {
        return Err(VerifyError::Fit(format!("{} pairs but {} abscissae", pairs.len(), xs.len())));
    }
    if let Some((l, r)) = pairs.iter().find(|(l, r)| !(*r > 0.0 && *l > 0.0 && l.is_finite() && r.is_finite())) {
        return Err(VerifyError::Fit(format!("need finite positive lhs and rhs, got ({l}, {r})")));
    }
    if let Some(x) = xs.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(VerifyError::Fit(format!("abscissa {x} is not positive")));
    }
    let ratios: Vec<f64> = pairs.iter().map(|(l, r)| l / r).collect();
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    Ok(Fit {
        c: ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        slope: ls_slope(&lx, &ly),
        min_ratio: ratios.iter().cloned().fold(f64::INFINITY, f64::min),
        max_ratio: ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Least-squares slope of `y` on `x`; zero when `x` has no spread.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return 0.0;
    }
    x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / sxx
}

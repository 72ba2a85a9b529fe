use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Result, VerifyError};
use crate::fit::Fit;

/// One checked quantity: an identity residual, one point of a scan, or a fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Case {
    pub name: String,
    pub params: BTreeMap<String, Value>,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    pub pass: bool,
}

impl Case {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, pass: bool) -> Self {
        Case {
            name: name.into(),
            params: BTreeMap::new(),
            lhs,
            rhs,
            residual: None,
            fitted_c: None,
            slope: None,
            pass,
        }
    }

    /// `residual < tol`, reported as `lhs = residual`, `rhs = tol`.
    pub fn residual(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        let mut c = Case::new(name, residual, tol, residual < tol);
        c.residual = Some(residual);
        c
    }

    /// A fit summary; `lhs`/`rhs` carry the largest and smallest ratio.
    pub fn fitted(name: impl Into<String>, fit: &Fit, pass: bool) -> Self {
        let mut c = Case::new(name, fit.max_ratio, fit.min_ratio, pass);
        c.fitted_c = Some(fit.c);
        c.slope = Some(fit.slope);
        c
    }

    /// A computation that raised an error; never passes.
    pub fn failed(name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Case::new(name, f64::NAN, f64::NAN, false).with("error", err.to_string())
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub cases: Vec<Case>,
    pub pass: bool,
    pub elapsed_ms: u64,
    pub resolution: Value,
    pub seed: u64,
}

impl Report {
    pub fn new(suite: &str, cases: Vec<Case>, resolution: Value, seed: u64, elapsed_ms: u64) -> Self {
        let pass = cases.iter().all(|c| c.pass);
        Report { suite: suite.to_string(), cases, pass, elapsed_ms, resolution, seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    suite: &'a str,
    name: &'a str,
    lhs: f64,
    rhs: f64,
    residual: Option<f64>,
    fitted_c: Option<f64>,
    slope: Option<f64>,
    pass: bool,
}

pub fn to_json(reports: &[Report]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(reports).map_err(|e| VerifyError::Fit(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn to_csv(reports: &[Report]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let io = |e: csv::Error| VerifyError::Io { path: "<csv>".into(), source: e.into() };
    w.write_record(["suite", "name", "lhs", "rhs", "residual", "fitted_c", "slope", "pass"]).map_err(io)?;
    for r in reports {
        for c in &r.cases {
            w.serialize(CsvRow {
                suite: &r.suite,
                name: &c.name,
                lhs: c.lhs,
                rhs: c.rhs,
                residual: c.residual,
                fitted_c: c.fitted_c,
                slope: c.slope,
                pass: c.pass,
            })
            .map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| VerifyError::Io { path: "<csv>".into(), source: e.into_error() })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `report.json` and/or `report.csv` into `dir`, creating it if needed.
pub fn emit_report(reports: &[Report], format: Format, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| VerifyError::Io { path: dir.to_path_buf(), source })?;
    let write = |name: &str, body: String| {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|source| VerifyError::Io { path, source })
    };
    if matches!(format, Format::Json | Format::Both) {
        write("report.json", to_json(reports)?)?;
    }
    if matches!(format, Format::Csv | Format::Both) {
        write("report.csv", to_csv(reports)?)?;
    }
    Ok(())
}

/// `0` when every suite passed, `1` otherwise.
pub fn exit_code(reports: &[Report]) -> i32 {
    if reports.iter().all(|r| r.pass) {
        0
    } else {
        1
    }
}

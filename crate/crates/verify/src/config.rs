use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use toml::{Table, Value};

use crate::error::{Result, VerifyError};

/// Parsed configuration: optional global keys plus one table per suite.
///
/// ```toml
/// seed = 7
///
/// [identity.eigen]
/// max_degree = 8
/// tol = 1e-8
/// ```
///
/// Suite sections may be written nested (`[identity.eigen]`) or quoted
/// (`["identity.eigen"]`); both resolve to the same suite.
#[derive(Debug, Clone, Default)]
pub struct Config {
    seed: Option<u64>,
    stable: bool,
    sections: BTreeMap<String, Table>,
}

const GLOBAL_KEYS: [&str; 2] = ["seed", "stable"];

impl Config {
    pub fn parse(text: &str, known: &[&str]) -> Result<Self> {
        let root: Table = text.parse().map_err(|e: toml::de::Error| VerifyError::config(e.to_string()))?;
        let mut cfg = Config::default();
        for (key, value) in &root {
            match key.as_str() {
                "seed" => {
                    let s = value
                        .as_integer()
                        .filter(|s| *s >= 0)
                        .ok_or_else(|| VerifyError::config("`seed` must be a non-negative integer"))?;
                    cfg.seed = Some(s as u64);
                }
                "stable" => {
                    cfg.stable = value.as_bool().ok_or_else(|| VerifyError::config("`stable` must be a boolean"))?;
                }
                _ => collect_sections(key, value, known, &mut cfg.sections)?,
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path, known: &[&str]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| VerifyError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, known)
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// When set, reports carry `elapsed_ms = 0` so that repeated runs are byte-identical.
    pub fn stable(&self) -> bool {
        self.stable
    }

    pub fn params(&self, suite: &str) -> Params {
        Params {
            section: suite.to_string(),
            table: self.sections.get(suite).cloned().unwrap_or_default(),
            used: BTreeSet::new(),
        }
    }
}

fn collect_sections(path: &str, value: &Value, known: &[&str], out: &mut BTreeMap<String, Table>) -> Result<()> {
    let table = value.as_table().ok_or_else(|| {
        if GLOBAL_KEYS.contains(&path) {
            VerifyError::config(format!("`{path}` has the wrong type"))
        } else {
            VerifyError::config(format!("unknown key `{path}`"))
        }
    })?;
    if known.contains(&path) {
        if out.insert(path.to_string(), table.clone()).is_some() {
            return Err(VerifyError::config(format!("section `{path}` given twice")));
        }
        return Ok(());
    }
    let prefix = format!("{path}.");
    if !known.iter().any(|k| k.starts_with(&prefix)) {
        return Err(VerifyError::config(format!("unknown section `{path}`")));
    }
    for (k, v) in table {
        collect_sections(&format!("{path}.{k}"), v, known, out)?;
    }
    Ok(())
}

/// Settings of one suite. Every getter records the key it read; [`Params::finish`]
/// rejects keys that no getter asked for.
#[derive(Debug, Clone)]
pub struct Params {
    section: String,
    table: Table,
    used: BTreeSet<String>,
}

impl Params {
    fn get(&mut self, key: &str) -> Option<&Value> {
        self.used.insert(key.to_string());
        self.table.get(key)
    }

    fn err(&self, key: &str, what: &str) -> VerifyError {
        VerifyError::config(format!("[{}] `{key}` must be {what}", self.section))
    }

    pub fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.get(key).cloned() {
            None => Ok(default),
            Some(v) => as_f64(&v).ok_or_else(|| self.err(key, "a number")),
        }
    }

    /// A tolerance or threshold: strictly positive and finite.
    pub fn positive(&mut self, key: &str, default: f64) -> Result<f64> {
        let v = self.f64(key, default)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.err(key, "positive"))
        }
    }

    pub fn usize(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.get(key).cloned() {
            None => Ok(default),
            Some(v) => as_usize(&v).ok_or_else(|| self.err(key, "a non-negative integer")),
        }
    }

    pub fn usizes(&mut self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.get(key).cloned() {
            None => Ok(default.to_vec()),
            Some(Value::Array(a)) if !a.is_empty() => {
                a.iter().map(as_usize).collect::<Option<Vec<_>>>().ok_or_else(|| self.err(key, "a list of integers"))
            }
            Some(_) => Err(self.err(key, "a non-empty list of integers")),
        }
    }

    pub fn f64s(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(key).cloned() {
            None => Ok(default.to_vec()),
            Some(Value::Array(a)) if !a.is_empty() => {
                a.iter().map(as_f64).collect::<Option<Vec<_>>>().ok_or_else(|| self.err(key, "a list of numbers"))
            }
            Some(_) => Err(self.err(key, "a non-empty list of numbers")),
        }
    }

    pub fn strings(&mut self, key: &str, default: &[&str]) -> Result<Vec<String>> {
        match self.get(key).cloned() {
            None => Ok(default.iter().map(|s| s.to_string()).collect()),
            Some(Value::Array(a)) if !a.is_empty() => a
                .iter()
                .map(|v| v.as_str().map(str::to_string))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| self.err(key, "a list of strings")),
            Some(_) => Err(self.err(key, "a non-empty list of strings")),
        }
    }

    /// Norm exponents: numbers ≥ 1 or the string `"inf"`.
    pub fn exponents(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        let parse = |v: &Value| match v {
            Value::String(s) if s == "inf" => Some(f64::INFINITY),
            v => as_f64(v).filter(|p| *p >= 1.0),
        };
        match self.get(key).cloned() {
            None => Ok(default.to_vec()),
            Some(Value::Array(a)) if !a.is_empty() => {
                a.iter().map(parse).collect::<Option<Vec<_>>>().ok_or_else(|| self.err(key, "a list of p ≥ 1 or \"inf\""))
            }
            Some(_) => Err(self.err(key, "a non-empty list of p ≥ 1 or \"inf\"")),
        }
    }

    pub fn finish(self) -> Result<()> {
        let unknown: Vec<&String> = self.table.keys().filter(|k| !self.used.contains(*k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            let names: Vec<&str> = unknown.iter().map(|s| s.as_str()).collect();
            Err(VerifyError::config(format!("[{}] unknown keys: {}", self.section, names.join(", "))))
        }
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn as_usize(v: &Value) -> Option<usize> {
    v.as_integer().filter(|i| *i >= 0).map(|i| i as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    const KNOWN: [&str; 3] = ["identity.eigen", "identity.decomp", "scan.falpha"];

    #[test]
    fn nested_and_quoted_sections_resolve() {
        let c = Config::parse("seed = 3\n[identity.eigen]\ntol = 1e-9\n[\"scan.falpha\"]\nalpha = [0.75]\n", &KNOWN).unwrap();
        assert_eq!(c.seed(), Some(3));
        let mut p = c.params("identity.eigen");
        assert_eq!(p.positive("tol", 1.0).unwrap(), 1e-9);
        assert_eq!(p.usize("max_degree", 8).unwrap(), 8);
        p.finish().unwrap();
        let mut q = c.params("scan.falpha");
        assert_eq!(q.f64s("alpha", &[]).unwrap(), vec![0.75]);
        q.finish().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Config::parse("[identity.nope]\n", &KNOWN).is_err());
        assert!(Config::parse("[other]\n", &KNOWN).is_err());
        assert!(Config::parse("seed = -1\n", &KNOWN).is_err());
        assert!(Config::parse("x = 1\n", &KNOWN).is_err());
        assert!(Config::parse("[identity.eigen\n", &KNOWN).is_err());
        let c = Config::parse("[identity.eigen]\ntol = 0\nextra = 1\n", &KNOWN).unwrap();
        let mut p = c.params("identity.eigen");
        assert!(p.positive("tol", 1.0).is_err());
        assert!(p.finish().is_err());
    }

    #[test]
    fn exponents_accept_inf() {
        let c = Config::parse("[identity.eigen]\np = [2, \"inf\"]\n", &KNOWN).unwrap();
        let mut p = c.params("identity.eigen");
        assert_eq!(p.exponents("p", &[2.0]).unwrap(), vec![2.0, f64::INFINITY]);
    }
}

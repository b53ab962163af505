//! Flat `key = value` reports.

use std::fmt::{self, Display};

use crate::fitting::{ComparisonReport, FitResult, ModelParams, Preferred};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvReport {
    entries: Vec<(String, String)>,
}

impl KvReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Display) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn extend_prefixed(&mut self, prefix: &str, other: &KvReport) -> &mut Self {
        for (k, v) in &other.entries {
            self.entries.push((format!("{prefix}{k}"), v.clone()));
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Parses text produced by `Display`; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Option<Self> {
        let mut out = Self::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once(" = ")?;
            out.entries.push((k.to_string(), v.to_string()));
        }
        Some(out)
    }
}

impl fmt::Display for KvReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

pub fn opt_float(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| x.to_string())
}

pub fn fit_report(fit: &FitResult) -> KvReport {
    let mut r = KvReport::new();
    r.push("model", fit.model.name());
    match &fit.params {
        ModelParams::LogNormal(p) => {
            r.push("p0", p.p0)
                .push("amplitude", p.amplitude)
                .push("t_c", p.t_c)
                .push("varpi", p.varpi);
        }
        ModelParams::PowerLawCutoff(p) => {
            r.push("alpha", p.alpha)
                .push("amplitude", p.amplitude)
                .push("t0", p.t0);
        }
    }
    r.push("sse", fit.sse)
        .push("r_squared", opt_float(fit.r_squared))
        .push("n_bins", fit.n_bins)
        .push("converged", fit.converged)
        .push("iterations", fit.iterations);
    r
}

pub fn comparison_report(c: &ComparisonReport) -> KvReport {
    let mut r = KvReport::new();
    r.extend_prefixed("first.", &fit_report(&c.first))
        .extend_prefixed("second.", &fit_report(&c.second))
        .push("relative_sse_difference", c.relative_sse_difference)
        .push("indistinguishable", c.indistinguishable)
        .push(
            "preferred",
            match c.preferred {
                Some(Preferred::First) => "first",
                Some(Preferred::Second) => "second",
                None => "none",
            },
        );
    r
}

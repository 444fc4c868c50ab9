//! Report documents emitted by the command-line driver.
//!
//! Reports are deterministic: stable field order, sorted parameter maps and
//! shortest round-trip float formatting. Identical configurations produce
//! byte-identical files for any worker count, so wall-clock timing is
//! logged on stderr rather than stored in the document.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// One named assertion: passes when `value <= bound`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

/// One numeric table entry keyed by the sequence size it was computed at.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricRow {
    pub n: u64,
    pub metric: String,
    pub value: f64,
}

/// Output format of [`Report::emit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::invalid(format!(
                "unknown format '{other}' (expected json|csv)"
            ))),
        }
    }
}

/// Versioned report document.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub samples: u64,
    pub tolerance: f64,
    /// Every input parameter of the run, stringified.
    pub params: BTreeMap<String, String>,
    pub checks: Vec<CheckLine>,
    pub metrics: Vec<MetricRow>,
}

impl Report {
    pub fn new(command: &str, seed: u64, samples: u64, tolerance: f64) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            seed,
            samples,
            tolerance,
            params: BTreeMap::new(),
            checks: Vec::new(),
            metrics: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.params.insert(key.to_string(), value.to_string());
    }

    /// Record an assertion; returns whether it passed.
    pub fn check(&mut self, name: impl Into<String>, value: f64, bound: f64) -> bool {
        let pass = value <= bound;
        self.checks.push(CheckLine {
            name: name.into(),
            value,
            bound,
            pass,
        });
        pass
    }

    pub fn metric(&mut self, n: u64, metric: impl Into<String>, value: f64) {
        self.metrics.push(MetricRow {
            n,
            metric: metric.into(),
            value,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Report> {
        Ok(serde_json::from_str(s)?)
    }

    /// One row per metric, `n,metric,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,metric,value\n");
        for row in &self.metrics {
            out.push_str(&format!("{},{},{}\n", row.n, row.metric, row.value));
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => Ok(self.to_csv()),
        }
    }

    /// Write to `path`, or to stdout when no path is given.
    pub fn emit(&self, path: Option<&Path>, format: ReportFormat) -> Result<()> {
        let body = self.render(format)?;
        match path {
            Some(p) => {
                std::fs::write(p, body)?;
            }
            None => {
                std::io::stdout().write_all(body.as_bytes())?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_exact() {
        let mut r = Report::new("stable", 42, 1000, 1e-9);
        r.param("kind", "mixture");
        r.param("n", "8,32");
        r.check("neg_norm", 0.0, 1e-9);
        r.check("joint_cf", 1.7, 1.0);
        r.metric(8, "variance", 1.0);
        r.metric(8, "ks", 0.0123456789);
        r.metric(32, "variance", 1.0 / 3.0);
        let json = r.to_json().unwrap();
        let back = Report::from_json(&json).unwrap();
        assert_eq!(back, r);
        assert!(!r.all_pass());
    }

    #[test]
    fn empty_report_is_valid() {
        let r = Report::new("selftest", 1, 0, 1e-9);
        let json = r.to_json().unwrap();
        let back = Report::from_json(&json).unwrap();
        assert_eq!(back, r);
        assert!(r.all_pass());
    }

    #[test]
    fn csv_row_count_matches_metrics() {
        let mut r = Report::new("clt", 42, 0, 1e-9);
        for &n in &[16u64, 64, 256] {
            for metric in ["variance", "contraction_r1", "fourth_moment"] {
                r.metric(n, metric, 1.0);
            }
        }
        let csv = r.to_csv();
        let rows: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(rows.len(), 1 + 3 * 3);
        assert_eq!(rows[0], "n,metric,value");
    }
}

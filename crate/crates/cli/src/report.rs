use serde::Serialize;
use serde_json::{json, Value};
use siegel_core::{Error, Result};

use crate::config::{Format, RunConfig, CONFIG_PREFIX};

/// One named invariant check; `--assert` turns a failure into exit 4.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

/// Result of one command: a row table, a summary, checks, and optionally a
/// class map.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub summary: Value,
    pub rows: Vec<Value>,
    csv: Vec<u8>,
    pub checks: Vec<Check>,
    pub pgm: Option<Vec<u8>>,
    /// Set when the experiment declined to proceed (exit 3), with the reason.
    pub refusal: Option<String>,
}

impl Report {
    pub fn new<R: Serialize>(rows: &[R], summary: Value) -> Result<Self> {
        let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        let csv = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        let rows = rows
            .iter()
            .map(|r| serde_json::to_value(r).map_err(|e| Error::Io(e.to_string())))
            .collect::<Result<_>>()?;
        Ok(Report { summary, rows, csv, ..Default::default() })
    }

    pub fn check(mut self, c: Check) -> Self {
        self.checks.push(c);
        self
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// The payload in the configured format, with the configuration embedded.
    pub fn render(&self, config: &RunConfig) -> Vec<u8> {
        match config.format {
            Format::Csv => {
                let mut out = Vec::new();
                out.extend_from_slice(header_line().as_bytes());
                out.extend_from_slice(format!("{CONFIG_PREFIX}{}\n", config.to_json()).as_bytes());
                out.extend_from_slice(format!("# summary: {}\n", self.summary).as_bytes());
                for c in &self.checks {
                    let verdict = if c.passed { "pass" } else { "FAIL" };
                    out.extend_from_slice(format!("# check {}: {verdict}: {}\n", c.name, c.detail).as_bytes());
                }
                if let Some(r) = &self.refusal {
                    out.extend_from_slice(format!("# refused: {r}\n").as_bytes());
                }
                out.extend_from_slice(&self.csv);
                out
            }
            Format::Json => {
                let doc = json!({
                    "generator": generator(),
                    "config": config,
                    "summary": self.summary,
                    "checks": self.checks,
                    "refused": self.refusal,
                    "rows": self.rows,
                });
                let mut out = serde_json::to_vec_pretty(&doc).expect("report serializes");
                out.push(b'\n');
                out
            }
        }
    }
}

pub fn generator() -> String {
    format!("siegel {}", env!("CARGO_PKG_VERSION"))
}

fn header_line() -> String {
    format!("# {}\n", generator())
}

/// `(log10|x|, arg x / π)` from `log|x|` and `arg x / π`.
pub fn log10_pair(ln_abs: f64, arg_over_pi: f64) -> (f64, f64) {
    (ln_abs / std::f64::consts::LN_10, arg_over_pi)
}

//! Report files: a versioned JSON document and a flat CSV table.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use concentra_core::report::{BoundReport, Verdict};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

pub const REPORT_VERSION: u32 = 1;

/// Table columns with the descriptions written into the CSV header block.
pub const COLUMNS: [(&str, &str); 9] = [
    ("result", "name of the result record the row belongs to"),
    ("quantity", "what the estimate measures"),
    (
        "parameter",
        "grid value (p, t, lambda, x, n, instance or subset, per result)",
    ),
    ("estimate", "empirical or exact value"),
    ("std_error", "standard error of the estimate (0 when exact)"),
    (
        "bound_lower",
        "lower bound or reference value, empty when none",
    ),
    (
        "bound_upper",
        "upper bound or reference value, empty when none",
    ),
    ("ratio", "estimate / bound_upper, empty when undefined"),
    ("verdict", "pass, fail, report_only or inconclusive"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultEntry {
    pub name: String,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<BoundReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ResultEntry {
    pub fn from_report(report: BoundReport) -> Self {
        Self {
            name: report.name.clone(),
            verdict: report.verdict,
            report: Some(report),
            details: None,
            error: None,
        }
    }

    pub fn failure(name: &str, err: &anyhow::Error) -> Self {
        Self {
            name: name.into(),
            verdict: Verdict::Inconclusive,
            report: None,
            details: None,
            error: Some(format!("{err:#}")),
        }
    }

    pub fn with_details<T: Serialize>(mut self, details: &T) -> Self {
        self.details = Some(serde_json::to_value(details).expect("details serialize"));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub config: ExperimentConfig,
    pub results: Vec<ResultEntry>,
    pub verdict: Verdict,
    pub timing: Option<Timing>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

fn verdict_name(v: Verdict) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|j| j.as_str().map(String::from))
        .unwrap_or_default()
}

impl Report {
    pub fn new(
        config: ExperimentConfig,
        results: Vec<ResultEntry>,
        timing: Option<Timing>,
    ) -> Self {
        let verdict = Verdict::combine(results.iter().map(|r| r.verdict));
        Self {
            version: REPORT_VERSION,
            config,
            results,
            verdict,
            timing,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text).context("not a report file")?;
        anyhow::ensure!(
            r.version == REPORT_VERSION,
            "unsupported report version {}",
            r.version
        );
        Ok(r)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut head = format!(
            "# concentra report table v{REPORT_VERSION}\n# experiment: {}\n",
            self.config.kind.name()
        );
        for (name, desc) in COLUMNS {
            head.push_str(&format!("# column {name}: {desc}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(COLUMNS.map(|(n, _)| n))?;
        for entry in &self.results {
            let Some(rep) = &entry.report else { continue };
            for row in &rep.rows {
                w.write_record([
                    entry.name.clone(),
                    row.quantity.clone(),
                    format!("{:?}", row.parameter),
                    format!("{:?}", row.estimate),
                    format!("{:?}", row.std_error),
                    opt(row.bound_lower),
                    opt(row.bound_upper),
                    opt(row.ratio),
                    verdict_name(row.verdict),
                ])?;
            }
        }
        let body = String::from_utf8(w.into_inner()?)?;
        Ok(head + &body)
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let json = dir.join(format!("{stem}.json"));
        let table = dir.join(format!("{stem}.csv"));
        std::fs::write(&json, self.to_json())
            .with_context(|| format!("cannot write {}", json.display()))?;
        std::fs::write(&table, self.to_csv()?)
            .with_context(|| format!("cannot write {}", table.display()))?;
        Ok((json, table))
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: {}\n",
            self.config.kind.name(),
            verdict_name(self.verdict)
        );
        for r in &self.results {
            let rows = r.report.as_ref().map_or(0, |b| b.rows.len());
            s.push_str(&format!(
                "  {:<32} {:<13} {rows} row(s)\n",
                r.name,
                verdict_name(r.verdict)
            ));
            if let Some(e) = &r.error {
                s.push_str(&format!("    error: {e}\n"));
            }
            for w in r.report.iter().flat_map(|b| &b.warnings) {
                s.push_str(&format!("    warning: {w}\n"));
            }
        }
        s
    }
}

//! Result records shared by the verification routines.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Denominators at or below this magnitude produce no ratio.
pub const RATIO_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Nothing is asserted; the numbers are reported for inspection.
    ReportOnly,
    /// A check could not be carried out (numeric failure, too few samples).
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    /// Fail dominates, then inconclusive; report-only rows only decide the
    /// outcome when nothing was checked.
    pub fn combine<I: IntoIterator<Item = Verdict>>(verdicts: I) -> Self {
        let mut any_pass = false;
        let mut any_inconclusive = false;
        for v in verdicts {
            match v {
                Self::Fail => return Self::Fail,
                Self::Inconclusive => any_inconclusive = true,
                Self::Pass => any_pass = true,
                Self::ReportOnly => {}
            }
        }
        if any_inconclusive {
            Self::Inconclusive
        } else if any_pass {
            Self::Pass
        } else {
            Self::ReportOnly
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::Fail => 2,
            Self::ReportOnly | Self::Inconclusive => 3,
        }
    }
}

/// `num / den`, or `None` when `|den|` is at or below [`RATIO_FLOOR`].
pub fn ratio(num: f64, den: f64) -> Option<f64> {
    (den.abs() > RATIO_FLOOR).then(|| num / den)
}

/// One grid point: an empirical quantity next to its bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub quantity: String,
    /// Grid value (p, t, λ, ...).
    pub parameter: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub bound_lower: Option<f64>,
    pub bound_upper: Option<f64>,
    /// `estimate / bound_upper`.
    pub ratio: Option<f64>,
    pub verdict: Verdict,
}

impl BoundRow {
    pub fn new(quantity: &str, parameter: f64, estimate: f64, std_error: f64) -> Self {
        Self {
            quantity: quantity.into(),
            parameter,
            estimate,
            std_error,
            bound_lower: None,
            bound_upper: None,
            ratio: None,
            verdict: Verdict::ReportOnly,
        }
    }

    pub fn with_upper(mut self, bound: f64) -> Self {
        self.bound_upper = Some(bound);
        self.ratio = ratio(self.estimate, bound);
        self
    }

    pub fn with_lower(mut self, bound: f64) -> Self {
        self.bound_lower = Some(bound);
        self
    }

    pub fn with_verdict(mut self, verdict: Verdict) -> Self {
        self.verdict = verdict;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub parameter_name: String,
    pub rows: Vec<BoundRow>,
    pub seeds: Vec<u64>,
    pub n_samples: u64,
    pub verdict: Verdict,
    pub warnings: Vec<String>,
}

impl BoundReport {
    pub fn new(name: &str, parameter_name: &str, seeds: Vec<u64>, n_samples: u64) -> Self {
        Self {
            name: name.into(),
            parameter_name: parameter_name.into(),
            rows: Vec::new(),
            seeds,
            n_samples,
            verdict: Verdict::ReportOnly,
            warnings: Vec::new(),
        }
    }

    pub fn push(&mut self, row: BoundRow) {
        self.rows.push(row);
    }

    /// Sets the overall verdict from the rows.
    pub fn finish(mut self) -> Self {
        self.verdict = Verdict::combine(self.rows.iter().map(|r| r.verdict));
        self
    }

    pub fn parameters(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.parameter).collect()
    }
}

//! Structured results for verification runs.
//!
//! Every check contributes one [`CheckResult`] with a worst-case residual
//! and the threshold it was held to; a [`Report`] bundles the results with
//! the run parameters so the outcome is reproducible from the report
//! alone.  The types serialize with `serde`, and the command-line frontend
//! renders them as JSON or CSV.

use serde::Serialize;

/// Outcome of a single check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    /// The worst residual stayed at or below the threshold.
    Pass,
    /// The worst residual exceeded the threshold, or the check could not
    /// produce a residual at all.
    Fail,
    /// The check was not requested in this run.
    Skipped,
}

/// One named check with its worst residual and threshold.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    /// Stable check name, e.g. `"gram"` or `"commutant"`.
    pub name: String,
    pub status: CheckStatus,
    /// Worst residual observed, when the check produces one.
    pub residual: Option<f64>,
    /// Threshold the residual was compared against.
    pub threshold: Option<f64>,
    /// Human-readable details: offending indices, measured dimensions,
    /// error messages.
    pub notes: Vec<String>,
}

impl CheckResult {
    /// A check that produced a residual: passes iff it is finite and at
    /// most `threshold`.
    pub fn from_residual(name: &str, residual: f64, threshold: f64) -> Self {
        let status = if residual.is_finite() && residual <= threshold {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        CheckResult {
            name: name.to_string(),
            status,
            residual: Some(residual),
            threshold: Some(threshold),
            notes: Vec::new(),
        }
    }

    /// A check that failed before producing a residual.
    pub fn errored(name: &str, message: String) -> Self {
        CheckResult {
            name: name.to_string(),
            status: CheckStatus::Fail,
            residual: None,
            threshold: None,
            notes: vec![message],
        }
    }

    /// A check that was not requested.
    pub fn skipped(name: &str) -> Self {
        CheckResult {
            name: name.to_string(),
            status: CheckStatus::Skipped,
            residual: None,
            threshold: None,
            notes: Vec::new(),
        }
    }

    /// Appends a detail note, builder-style.
    pub fn with_note(mut self, note: String) -> Self {
        self.notes.push(note);
        self
    }
}

/// Parameters a verification run was performed with.
#[derive(Debug, Clone, Serialize)]
pub struct RunParams {
    /// Weight exponent of the model.
    pub n: u32,
    /// Largest polynomial index exercised.
    pub w_max: u32,
    /// Quadrature node count.
    pub nodes: usize,
    /// Residual threshold override, if one was supplied; otherwise each
    /// check uses its documented default.
    pub tol: Option<f64>,
}

/// Full outcome of a verification run.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    /// Model identifier, e.g. `"cp2"`.
    pub model: String,
    pub params: RunParams,
    pub checks: Vec<CheckResult>,
    /// Differences between stored closed forms and the values the
    /// construction actually produces (e.g. known typos in published
    /// constants), stated once per run.
    pub discrepancies: Vec<String>,
}

impl Report {
    pub fn new(model: &str, params: RunParams) -> Self {
        Report {
            model: model.to_string(),
            params,
            checks: Vec::new(),
            discrepancies: Vec::new(),
        }
    }

    /// True when no executed check failed (skipped checks do not count).
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    /// Number of checks that actually ran.
    pub fn executed_count(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.status != CheckStatus::Skipped)
            .count()
    }
}

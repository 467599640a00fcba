//! Pass/fail reports shared by every verifier.

use serde::Serialize;

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// Largest residual seen; 0 for exact passes and structural checks.
    pub max_residual: f64,
    /// Indices locating the worst (or first) failure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
    /// Holds by construction of the data model and is not evaluated.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub structural: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn new() -> Self {
        VerificationReport { pass: true, checks: Vec::new() }
    }

    pub fn push(&mut self, check: CheckResult) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn structural(&mut self, name: &str, note: &str) {
        self.push(CheckResult {
            name: name.to_string(),
            pass: true,
            max_residual: 0.0,
            witness: None,
            structural: true,
            note: Some(note.to_string()),
        });
    }

    pub fn fail(&mut self, name: &str, witness: Option<Vec<usize>>, note: impl Into<String>) {
        self.push(CheckResult {
            name: name.to_string(),
            pass: false,
            max_residual: f64::INFINITY,
            witness,
            structural: false,
            note: Some(note.into()),
        });
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.max_residual).fold(0.0, f64::max)
    }
}

impl Default for VerificationReport {
    fn default() -> Self {
        Self::new()
    }
}

/// Accumulates the worst residual of one check across many evaluations.
#[derive(Debug, Clone)]
pub(crate) struct ResidualTracker {
    name: String,
    tol: f64,
    exact: bool,
    worst: f64,
    witness: Option<Vec<usize>>,
    failed: bool,
}

impl ResidualTracker {
    /// In exact mode a check fails on any nonzero residual, whatever `tol` is.
    pub(crate) fn new(name: &str, tol: f64, exact: bool) -> Self {
        ResidualTracker { name: name.to_string(), tol, exact, worst: 0.0, witness: None, failed: false }
    }

    /// Records one residual; the witness is kept for the first failure.
    /// `is_zero` is the exact verdict in exact mode.
    pub(crate) fn record(&mut self, residual: f64, is_zero: bool, witness: impl FnOnce() -> Vec<usize>) {
        let bad = if self.exact { !is_zero } else { residual > self.tol || residual.is_nan() };
        if bad && !self.failed {
            self.witness = Some(witness());
            self.failed = true;
        }
        if residual > self.worst {
            self.worst = residual;
        }
    }

    pub(crate) fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name,
            pass: !self.failed,
            max_residual: self.worst,
            witness: if self.failed { self.witness } else { None },
            structural: false,
            note: None,
        }
    }
}

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::rates::Provenance;

/// Outcome of one report row.
///
/// `Fail` only when the observation exceeds `target + tol + 2·err`;
/// observations between `target` and that limit are `PassWithSlack`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "PASS-WITH-SLACK")]
    PassWithSlack,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Status {
    pub fn classify(observed: f64, target: f64, slack: f64) -> Status {
        if observed <= target {
            Status::Pass
        } else if observed <= target + slack {
            Status::PassWithSlack
        } else {
            Status::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::PassWithSlack => "PASS-WITH-SLACK",
            Status::Fail => "FAIL",
        }
    }
}

/// One `(k, f)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub k: u64,
    pub counterfunction: Option<String>,
    /// Threshold, window end, `Γ(k, f)` or `Ω^f(K, k)` depending on scenario.
    pub certified_bound: u64,
    /// The bound the observation is compared to, usually `1/(k+1)`.
    pub target: f64,
    pub worst_observed: f64,
    /// `target + tol + 2·err − worst_observed`; negative means failure.
    pub slack: f64,
    pub status: Status,
    /// Witnessing time or index, when the check is existential.
    pub witness: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub k: u64,
    pub counterfunction: Option<String>,
    pub detail: String,
    pub observed: f64,
    pub allowed: f64,
}

/// Sampling resolution behind the continuous quantifiers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub step: f64,
    pub horizon: f64,
    pub points: usize,
}

/// Result of one verification run. Passes iff `violations` is empty.
///
/// `runtime` is diagnostic only: it is not serialized, so reports from
/// identical runs are byte-identical, and it is ignored by `==`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub subject: String,
    pub seed: Option<u64>,
    pub tolerance: f64,
    pub grid: Option<GridInfo>,
    pub rows: Vec<ReportRow>,
    pub violations: Vec<Violation>,
    pub provenance: Vec<Provenance>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub runtime: Duration,
}

impl PartialEq for Report {
    fn eq(&self, other: &Self) -> bool {
        self.scenario == other.scenario
            && self.subject == other.subject
            && self.seed == other.seed
            && self.tolerance == other.tolerance
            && self.grid == other.grid
            && self.rows == other.rows
            && self.violations == other.violations
            && self.provenance == other.provenance
            && self.notes == other.notes
    }
}

impl Report {
    pub fn new(scenario: impl Into<String>, subject: impl Into<String>, tolerance: f64) -> Self {
        Report {
            scenario: scenario.into(),
            subject: subject.into(),
            seed: None,
            tolerance,
            grid: None,
            rows: Vec::new(),
            violations: Vec::new(),
            provenance: Vec::new(),
            notes: Vec::new(),
            runtime: Duration::ZERO,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, status: Status) -> usize {
        self.rows.iter().filter(|r| r.status == status).count()
    }

    /// Appends a row and, if it failed, a matching violation.
    pub(crate) fn push_row(&mut self, row: ReportRow, detail: impl FnOnce() -> String) {
        if row.status == Status::Fail {
            self.violations.push(Violation {
                k: row.k,
                counterfunction: row.counterfunction.clone(),
                detail: detail(),
                observed: row.worst_observed,
                allowed: row.worst_observed + row.slack,
            });
        }
        self.rows.push(row);
    }

    /// Folds another report's rows, violations and provenance into this one.
    pub fn absorb(&mut self, other: Report) {
        self.rows.extend(other.rows);
        self.violations.extend(other.violations);
        for p in other.provenance {
            if !self.provenance.contains(&p) {
                self.provenance.push(p);
            }
        }
        self.notes.extend(other.notes);
        self.runtime += other.runtime;
    }

    /// One line per row, for terminals.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{} on {}: {} ({} rows, {} with slack, {} violations)\n",
            self.scenario,
            self.subject,
            if self.passed() { "PASS" } else { "FAIL" },
            self.rows.len(),
            self.count(Status::PassWithSlack),
            self.violations.len()
        );
        for row in &self.rows {
            out.push_str(&format!(
                "  k={:<3} f={:<14} bound={:<10} worst={:.3e} target={:.3e} {}\n",
                row.k,
                row.counterfunction.as_deref().unwrap_or("-"),
                row.certified_bound,
                row.worst_observed,
                row.target,
                row.status.as_str()
            ));
        }
        out
    }
}

/// Finite stand-in for values that may be infinite, so JSON stays parseable.
pub(crate) fn finite(x: f64) -> f64 {
    if x.is_nan() {
        f64::MAX
    } else {
        x.clamp(-f64::MAX, f64::MAX)
    }
}

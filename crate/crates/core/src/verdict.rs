//! Pass/fail records for checked inequalities.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Report-only probe that did not come out as expected; never fatal.
    Flagged,
}

/// One checked inequality: `slack ≥ -tolerance` passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    /// The inequality in words or symbols, e.g. "h_s[u] >= -tol_disc".
    pub inequality: String,
    pub status: Status,
    pub slack: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Verdict {
    /// Hard assertion: fails when `slack < -tolerance` (or is NaN).
    pub fn assert(check: &str, inequality: &str, slack: f64, tolerance: f64) -> Self {
        let ok = slack >= -tolerance;
        Verdict {
            check: check.to_string(),
            inequality: inequality.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            slack,
            tolerance,
            detail: String::new(),
        }
    }

    /// Report-only probe: a miss is flagged instead of failed.
    pub fn probe(check: &str, inequality: &str, slack: f64, tolerance: f64) -> Self {
        let mut v = Self::assert(check, inequality, slack, tolerance);
        if v.status == Status::Fail {
            v.status = Status::Flagged;
        }
        v
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

pub fn all_passed(verdicts: &[Verdict]) -> bool {
    verdicts.iter().all(Verdict::passed)
}

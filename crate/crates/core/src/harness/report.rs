//! Machine-readable pass/fail verdicts.

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub name: String,
    pub status: Status,
    pub measured: f64,
    pub threshold: f64,
}

impl Case {
    /// Passes when `measured ≤ threshold`; NaN fails.
    pub fn at_most(name: String, measured: f64, threshold: f64) -> Self {
        let status = if measured <= threshold {
            Status::Pass
        } else {
            Status::Fail
        };
        Case {
            name,
            status,
            measured,
            threshold,
        }
    }

    /// Passes when `measured ≥ threshold`; NaN fails.
    pub fn at_least(name: String, measured: f64, threshold: f64) -> Self {
        let status = if measured >= threshold {
            Status::Pass
        } else {
            Status::Fail
        };
        Case {
            name,
            status,
            measured,
            threshold,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub cases: Vec<Case>,
}

impl Report {
    pub fn new(suite: impl Into<String>, cases: Vec<Case>) -> Self {
        Report {
            suite: suite.into(),
            cases,
        }
    }

    pub fn passed(&self) -> bool {
        self.cases.iter().all(Case::passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Fixed-width table, one case per line.
    pub fn to_table(&self) -> String {
        let w = self
            .cases
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(4)
            .max(4);
        let mut s = format!(
            "{:<w$}  {:<6}  {:>12}  {:>12}\n",
            "case", "status", "measured", "threshold"
        );
        for c in &self.cases {
            let st = if c.passed() { "PASS" } else { "FAIL" };
            s += &format!(
                "{:<w$}  {:<6}  {:>12.4e}  {:>12.4e}\n",
                c.name, st, c.measured, c.threshold
            );
        }
        s
    }
}

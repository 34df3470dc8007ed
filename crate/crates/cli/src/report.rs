//! Machine-readable reports. A report is byte-stable for an equal
//! `(config, seed)` pair: wall-clock timing is kept out of the serialized
//! form and printed separately, and every failed check carries a
//! serialized, replayable witness.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::time::Duration;

use crate::config::RunConfig;

/// A self-contained descriptor of one failed (or replayed) check.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Witness {
    pub suite: String,
    pub check: String,
    pub payload: Value,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl CheckResult {
    pub fn pass(name: impl Into<String>, detail: Option<Value>) -> Self {
        CheckResult {
            name: name.into(),
            pass: true,
            detail,
            witness: None,
        }
    }

    /// A failed check always carries its witness.
    pub fn fail(name: impl Into<String>, detail: Option<Value>, witness: Witness) -> Self {
        CheckResult {
            name: name.into(),
            pass: false,
            detail,
            witness: Some(witness),
        }
    }

    pub fn from_outcome(
        name: impl Into<String>,
        pass: bool,
        detail: Option<Value>,
        witness: impl FnOnce() -> Witness,
    ) -> Self {
        if pass {
            CheckResult::pass(name, detail)
        } else {
            CheckResult::fail(name, detail, witness())
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Totals {
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub config: RunConfig,
    pub checks: Vec<CheckResult>,
    pub totals: Totals,
    /// Wall-clock duration; intentionally not serialized so report bytes
    /// depend only on config and seed.
    #[serde(skip)]
    pub elapsed: Option<Duration>,
}

impl Report {
    pub fn new(config: RunConfig, checks: Vec<CheckResult>) -> Self {
        let passed = checks.iter().filter(|c| c.pass).count();
        let failed = checks.len() - passed;
        Report {
            suite: config.suite.clone(),
            seed: config.seed,
            config,
            checks,
            totals: Totals { passed, failed },
        elapsed: None,
        }
    }

    pub fn failed(&self) -> usize {
        self.totals.failed
    }

    /// Stable pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One human line per check plus a summary, for terminal output.
    pub fn console_summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name
            ));
        }
        out.push_str(&format!(
            "{}: {} passed, {} failed",
            self.suite, self.totals.passed, self.totals.failed
        ));
        if let Some(e) = self.elapsed {
            out.push_str(&format!(" ({:.2}s)", e.as_secs_f64()));
        }
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_and_json_stability() {
        let cfg = RunConfig::default_for("clique-ext");
        let checks = vec![
            CheckResult::pass("a", None),
            CheckResult::fail(
                "b",
                Some(serde_json::json!({"k": 1})),
                Witness {
                    suite: "clique-ext".into(),
                    check: "b".into(),
                    payload: serde_json::json!({"shape": {"components": []}}),
                },
            ),
        ];
        let mut report = Report::new(cfg.clone(), checks.clone());
        report.elapsed = Some(Duration::from_secs(3));
        let again = Report::new(cfg, checks);
        assert_eq!(report.totals, Totals { passed: 1, failed: 1 });
        // Timing never reaches the serialized bytes.
        assert_eq!(report.to_json(), again.to_json());
        assert!(!report.to_json().contains("elapsed"));
    }
}

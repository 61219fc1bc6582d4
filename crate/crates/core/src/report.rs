//! Structured run reports.
//!
//! A report is one JSON object with `schemaVersion`, the command, an echo of
//! the configuration, one entry per check (name, anchor, residual,
//! threshold, verdict) and command-specific details. Serialization is
//! deterministic, so equal runs produce byte-identical reports.

use serde::Serialize;
use serde_json::Value;

use crate::hvmodel::CheckReport;
use crate::nogo::{Step, TheoremReport, Verdict};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckVerdict {
    Pass,
    /// A violated hypothesis, expected for some inputs.
    HypothesisViolated,
    Fail,
}

impl CheckVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckVerdict::Pass => "pass",
            CheckVerdict::HypothesisViolated => "hypothesis-violated",
            CheckVerdict::Fail => "fail",
        }
    }
}

impl From<Verdict> for CheckVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Pass => CheckVerdict::Pass,
            Verdict::HypothesisViolated => CheckVerdict::HypothesisViolated,
            Verdict::Fail => CheckVerdict::Fail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub anchor: String,
    pub residual: f64,
    pub threshold: f64,
    pub verdict: CheckVerdict,
}

impl CheckEntry {
    pub fn new(name: impl Into<String>, anchor: impl Into<String>, residual: f64, threshold: f64, verdict: CheckVerdict) -> Self {
        Self { name: name.into(), anchor: anchor.into(), residual, threshold, verdict }
    }

    pub fn from_check(c: &CheckReport) -> Self {
        let verdict = if c.passed { CheckVerdict::Pass } else { CheckVerdict::Fail };
        Self::new(c.subject.clone(), c.rule.anchor(), c.residual, c.threshold, verdict)
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: Value,
    pub checks: Vec<CheckEntry>,
    pub exit_code: i32,
    pub details: Value,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_human(&self) -> String {
        let mut out = format!("{} (exit {})\n", self.command, self.exit_code);
        for c in &self.checks {
            out.push_str(&format!(
                "  {:<20} {} [{}] residual {:.3e} (threshold {:.1e})\n",
                c.verdict.as_str(),
                c.name,
                c.anchor,
                c.residual,
                c.threshold
            ));
        }
        if let Some(summary) = self.details.get("summary").and_then(Value::as_object) {
            for (k, v) in summary {
                out.push_str(&format!("  {k}: {}\n", plain(v)));
            }
        }
        out
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn step_json(s: &Step) -> Value {
    serde_json::to_value(s).expect("step serializes")
}

pub fn theorem_json(r: &TheoremReport) -> Value {
    serde_json::json!({
        "name": r.name,
        "verdict": r.verdict,
        "steps": r.steps.iter().map(step_json).collect::<Vec<_>>(),
        "notes": r.notes,
    })
}

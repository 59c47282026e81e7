//! Regression baselines: pinned values of a command's JSON output.
//!
//! A baseline file names the command it belongs to, says where its numbers
//! came from, and lists JSON pointers into the output with either a numeric
//! value and relative tolerance or an exact value. A baseline that records
//! the parameters it was pinned with is only picked up automatically by runs
//! with the same parameters.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    /// JSON pointer into the command output, e.g. `/value`.
    pub path: String,
    pub expected: Value,
    /// Relative tolerance for numbers; other values must match exactly.
    #[serde(default)]
    pub rel_tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
    pub provenance: String,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Drift {
    pub path: String,
    pub expected: Value,
    pub found: Value,
}

impl Baseline {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Pins the current values of `paths` with a common tolerance.
    pub fn pin(command: &str, provenance: &str, output: &Value, paths: &[&str], rel_tol: f64) -> Result<Self> {
        let checks = paths
            .iter()
            .map(|&p| {
                let v = output
                    .pointer(p)
                    .ok_or_else(|| Error::param(format!("output has no field {p}")))?;
                Ok(Check { path: p.to_string(), expected: v.clone(), rel_tol: if v.is_number() { rel_tol } else { 0.0 } })
            })
            .collect::<Result<_>>()?;
        Ok(Baseline { command: command.to_string(), params: None, provenance: provenance.to_string(), checks })
    }

    /// Whether this baseline was pinned by `command` with `params`.
    pub fn applies_to(&self, command: &str, params: &Value) -> bool {
        self.command == command && self.params.as_ref().map_or(true, |p| p == params)
    }

    /// Every check that fails against `output`.
    pub fn compare(&self, command: &str, output: &Value) -> Result<Vec<Drift>> {
        if self.command != command {
            return Err(Error::param(format!(
                "baseline is for `{}`, not `{command}`",
                self.command
            )));
        }
        let mut drift = Vec::new();
        for c in &self.checks {
            let found = output.pointer(&c.path).cloned().unwrap_or(Value::Null);
            let ok = match (c.expected.as_f64(), found.as_f64()) {
                (Some(e), Some(f)) => (e - f).abs() <= c.rel_tol * e.abs().max(f64::MIN_POSITIVE),
                _ => c.expected == found,
            };
            if !ok {
                drift.push(Drift { path: c.path.clone(), expected: c.expected.clone(), found });
            }
        }
        Ok(drift)
    }
}

//! Verification reports and their canonical JSON serialization.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::field::FieldElement;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    /// Process exit code: 0 pass, 1 mathematical failure, 3 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 3,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: Value,
    pub computed: Value,
    pub status: Status,
}

impl Check {
    /// Passes iff `computed == expected`.
    pub fn compare(name: impl Into<String>, expected: Value, computed: Value) -> Check {
        let status = if expected == computed {
            Status::Pass
        } else {
            Status::Fail
        };
        Check {
            name: name.into(),
            expected,
            computed,
            status,
        }
    }

    /// A check whose outcome is a property rather than a value comparison.
    pub fn property(name: impl Into<String>, computed: Value, holds: bool) -> Check {
        Check {
            name: name.into(),
            expected: Value::Bool(true),
            computed,
            status: if holds { Status::Pass } else { Status::Fail },
        }
    }

    /// A computation that could not reach a verdict (or raised an error that
    /// is not a mathematical failure).
    pub fn inconclusive(name: impl Into<String>, expected: Value, reason: impl ToString) -> Check {
        Check {
            name: name.into(),
            expected,
            computed: Value::String(reason.to_string()),
            status: Status::Inconclusive,
        }
    }

    pub fn failed(name: impl Into<String>, expected: Value, reason: impl ToString) -> Check {
        Check {
            name: name.into(),
            expected,
            computed: Value::String(reason.to_string()),
            status: Status::Fail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub fixture: String,
    pub environment: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub status: Status,
}

impl VerificationReport {
    pub fn new(fixture: impl Into<String>, environment: BTreeMap<String, Value>, checks: Vec<Check>) -> Self {
        let status = overall(&checks);
        VerificationReport {
            fixture: fixture.into(),
            environment,
            checks,
            status,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.status != Status::Pass).collect()
    }

    pub fn to_canonical_json(&self) -> String {
        canonical_json(&serde_json::to_value(self).expect("reports serialize"))
    }
}

/// Fail dominates inconclusive, which dominates pass.
pub fn overall(checks: &[Check]) -> Status {
    checks.iter().map(|c| c.status).max().unwrap_or(Status::Pass)
}

/// Pretty JSON with lexicographically sorted keys, LF line endings and a
/// trailing newline.
pub fn canonical_json(value: &Value) -> String {
    let sorted = sort_keys(value);
    let mut s = serde_json::to_string_pretty(&sorted).expect("values serialize");
    s.push('\n');
    s
}

fn sort_keys(value: &Value) -> Value {
    match value {
        Value::Object(map) => {
            let ordered: BTreeMap<&String, Value> = map.iter().map(|(k, v)| (k, sort_keys(v))).collect();
            Value::Object(ordered.into_iter().map(|(k, v)| (k.clone(), v)).collect())
        }
        Value::Array(items) => Value::Array(items.iter().map(sort_keys).collect()),
        other => other.clone(),
    }
}

/// Exact JSON for a field element: integers as numbers when they fit, every
/// other value (fractions, finite-field vectors) as a string.
pub fn element_json(e: &FieldElement) -> Value {
    match e {
        FieldElement::Prime { value, .. } => Value::from(*value),
        FieldElement::Rational(r) if r.is_integer() => match e.to_i64() {
            Some(v) => Value::from(v),
            None => Value::String(e.to_string()),
        },
        _ => Value::String(e.to_string()),
    }
}

pub fn elements_json(v: &[FieldElement]) -> Value {
    Value::Array(v.iter().map(element_json).collect())
}

//! Machine-readable check reports.
//!
//! Serialization is canonical: object keys are sorted (serde_json's default
//! map is ordered) and witness order is whatever the producing check emits,
//! which is always a deterministic order. `runtime_ms` is the only
//! nondeterministic field and is left out of [`CheckReport::canonical_json`].

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::interval::Interval;
use crate::rational::{format_rational, Rational};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Info => "info",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub check_name: String,
    pub status: Status,
    pub parameters: BTreeMap<String, Value>,
    pub observed: Vec<(String, Value)>,
    pub witnesses: Vec<(String, Value)>,
    pub notes: Vec<String>,
    pub runtime_ms: u64,
    started: Option<Instant>,
}

impl CheckReport {
    pub fn new(check_name: impl Into<String>) -> Self {
        CheckReport {
            check_name: check_name.into(),
            status: Status::Pass,
            parameters: BTreeMap::new(),
            observed: Vec::new(),
            witnesses: Vec::new(),
            notes: Vec::new(),
            runtime_ms: 0,
            started: Some(Instant::now()),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn observe(&mut self, label: impl Into<String>, value: impl Into<Value>) -> &mut Self {
        self.observed.push((label.into(), value.into()));
        self
    }

    pub fn witness(&mut self, label: impl Into<String>, data: impl Into<Value>) -> &mut Self {
        self.witnesses.push((label.into(), data.into()));
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    /// Marks the report failed; a failure must always carry a witness.
    pub fn fail(&mut self, label: impl Into<String>, data: impl Into<Value>) -> &mut Self {
        self.status = Status::Fail;
        self.witness(label, data)
    }

    pub fn set_info(&mut self) -> &mut Self {
        if self.status == Status::Pass {
            self.status = Status::Info;
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    /// Stops the clock. Called once by the producer before returning.
    pub fn finish(mut self) -> Self {
        if let Some(t) = self.started.take() {
            self.runtime_ms = t.elapsed().as_millis() as u64;
        }
        assert!(
            self.status != Status::Fail || !self.witnesses.is_empty(),
            "failed report `{}` without witness",
            self.check_name
        );
        self
    }

    pub fn canonical_json(&self) -> Value {
        let pairs = |items: &[(String, Value)]| {
            Value::Array(
                items
                    .iter()
                    .map(|(l, v)| json!({ "label": l, "value": v }))
                    .collect(),
            )
        };
        json!({
            "schema": SCHEMA_VERSION,
            "check_name": self.check_name,
            "status": self.status,
            "parameters": self.parameters,
            "observed": pairs(&self.observed),
            "witnesses": pairs(&self.witnesses),
            "notes": self.notes,
        })
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.canonical_json();
        v["runtime_ms"] = json!(self.runtime_ms);
        v
    }
}

pub fn rational_json(q: &Rational) -> Value {
    Value::String(format_rational(q))
}

pub fn interval_json(iv: &Interval) -> Value {
    iv.to_json()
}

pub fn set_json(elements: &[u64]) -> Value {
    json!(elements)
}

pub fn partition_json(blocks: &[Vec<u64>]) -> Value {
    json!(blocks)
}

pub fn rationals_json(values: &[Rational]) -> Value {
    Value::Array(values.iter().map(rational_json).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_section_excludes_runtime_and_sorts_keys() {
        let mut r = CheckReport::new("demo");
        r.param("zeta", 1).param("alpha", "w");
        r.observe("max", "2");
        let r = r.finish();
        let text = serde_json::to_string(&r.canonical_json()).unwrap();
        assert!(!text.contains("runtime_ms"));
        assert!(text.find("\"alpha\"").unwrap() < text.find("\"zeta\"").unwrap());
        assert!(r.to_json().get("runtime_ms").is_some());
    }

    #[test]
    #[should_panic(expected = "without witness")]
    fn failure_requires_witness() {
        let mut r = CheckReport::new("bad");
        r.status = Status::Fail;
        let _ = r.finish();
    }
}

//! Run reports (`"kind": "report"`).

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dto::SCHEMA;
use crate::error::{CliError, Exit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageTiming {
    pub stage: String,
    pub millis: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub schema: String,
    pub kind: String,
    pub verb: String,
    pub status: Status,
    #[serde(default)]
    pub artifacts: Vec<String>,
    #[serde(default)]
    pub witnesses: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default)]
    pub timing: Vec<StageTiming>,
    /// Exact results; rationals as strings.
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub result: Value,
    /// Sampled and floating-point results.
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub numeric: Value,
}

impl RunReport {
    pub const KIND: &'static str = "report";

    pub fn new(verb: &str) -> Self {
        RunReport {
            schema: SCHEMA.into(),
            kind: Self::KIND.into(),
            verb: verb.into(),
            status: Status::Pass,
            artifacts: Vec::new(),
            witnesses: Vec::new(),
            message: None,
            timing: Vec::new(),
            result: Value::Null,
            numeric: Value::Null,
        }
    }

    pub fn error(verb: &str, e: &CliError) -> Self {
        let mut r = RunReport::new(verb);
        r.status = Status::Error;
        r.message = Some(e.to_string());
        r
    }

    /// Marks the run failed. A failure always carries a message.
    pub fn fail(&mut self, message: impl Into<String>) {
        self.status = Status::Fail;
        self.message.get_or_insert_with(|| message.into());
    }

    /// `fail(message)` unless `ok`.
    pub fn require(&mut self, ok: bool, message: impl Into<String>) {
        if !ok {
            self.fail(message);
        }
    }

    pub fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timing.push(StageTiming { stage: stage.into(), millis: start.elapsed().as_millis() as u64 });
        out
    }

    pub fn exit(&self, err: Option<&CliError>) -> Exit {
        match (self.status, err) {
            (_, Some(e)) => e.exit(),
            (Status::Pass, None) => Exit::Pass,
            (Status::Fail, None) => Exit::Fail,
            (Status::Error, None) => Exit::Runtime,
        }
    }

    pub fn summary(&self) -> String {
        let status = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
        };
        match &self.message {
            Some(m) => format!("{status} {}: {m}", self.verb),
            None => format!("{status} {}", self.verb),
        }
    }
}

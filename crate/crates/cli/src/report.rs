//! The JSON document every subcommand prints.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use trisect_core::selftest::{Check, ErrorRecord};
use trisect_core::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Secant,
    Rank,
    Residual,
    Count,
    Invariant,
    Criterion,
}

/// One boolean claim of a report.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub kind: Kind,
    #[serde(flatten)]
    pub check: Check,
}

impl Certificate {
    pub fn new(kind: Kind, check: Check) -> Self {
        Self { kind, check }
    }

    pub fn pass(&self) -> bool {
        self.check.pass
    }
}

/// What a subcommand produced: named results plus the certificates that
/// decide the exit code.
#[derive(Debug, Default)]
pub struct Outcome {
    pub result: Map<String, Value>,
    pub certificates: Vec<Certificate>,
}

impl Outcome {
    pub fn put(&mut self, key: &str, value: impl Serialize) {
        self.result.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn certify(&mut self, kind: Kind, check: Check) {
        self.certificates.push(Certificate::new(kind, check));
    }
}

/// Wall-clock milliseconds per stage.
#[derive(Debug)]
pub struct Timings {
    stages: BTreeMap<String, f64>,
    last: Instant,
}

impl Timings {
    pub fn start() -> Self {
        Self { stages: BTreeMap::new(), last: Instant::now() }
    }

    /// Close the stage running since the previous call.
    pub fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        *self.stages.entry(stage.into()).or_default() += (now - self.last).as_secs_f64() * 1e3;
        self.last = now;
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub inputs_digest: String,
    pub inputs: Value,
    pub seed: u64,
    pub tolerances: Value,
    pub pass: bool,
    pub certificates: Vec<Certificate>,
    #[serde(flatten)]
    pub result: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

/// SHA-256 of the compact serialization; object keys are already sorted.
pub fn digest(inputs: &Value) -> String {
    hex::encode(Sha256::digest(inputs.to_string().as_bytes()))
}

impl Report {
    pub fn new(command: &str, inputs: Value, seed: u64, tolerances: Value, outcome: std::result::Result<Outcome, Error>) -> Self {
        let (outcome, error) = match outcome {
            Ok(o) => (o, None),
            Err(e) => (Outcome::default(), Some(ErrorRecord::from(&e))),
        };
        // A report with no certificates or with an error never passes.
        let pass = error.is_none() && !outcome.certificates.is_empty() && outcome.certificates.iter().all(Certificate::pass);
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            inputs_digest: digest(&inputs),
            inputs,
            seed,
            tolerances,
            pass,
            certificates: outcome.certificates,
            result: outcome.result,
            error,
            timings: None,
        }
    }

    pub fn with_timings(mut self, t: Timings) -> Self {
        self.timings = Some(t.stages);
        self
    }
}

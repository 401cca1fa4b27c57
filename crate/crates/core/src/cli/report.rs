use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Refuted,
    NoViolationFound,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Refuted => "refuted",
            Status::NoViolationFound => "no-violation-found",
        }
    }

    fn is_bad(&self) -> bool {
        matches!(self, Status::Fail | Status::Refuted)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub id: String,
    pub status: Status,
    pub details: String,
    /// The published claim this finding reproduces, when there is one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claim: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<serde_json::Value>,
}

impl Finding {
    pub fn new(id: impl Into<String>, status: Status, details: impl Into<String>) -> Self {
        Finding {
            id: id.into(),
            status,
            details: details.into(),
            claim: None,
            data: None,
        }
    }

    pub fn check(id: impl Into<String>, ok: bool, details: impl Into<String>) -> Self {
        Finding::new(id, if ok { Status::Pass } else { Status::Fail }, details)
    }

    /// A reproduced claim: `Refuted` rather than `Fail` when it does not hold.
    pub fn claim(id: impl Into<String>, claim: impl Into<String>, ok: bool, details: impl Into<String>) -> Self {
        Finding {
            claim: Some(claim.into()),
            ..Finding::new(id, if ok { Status::Pass } else { Status::Refuted }, details)
        }
    }

    pub fn with_data(mut self, data: serde_json::Value) -> Self {
        self.data = Some(data);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub seed: u64,
    pub resolution: usize,
    pub inputs_digest: String,
    pub findings: Vec<Finding>,
    pub exit: i32,
}

impl RunReport {
    pub fn new(command: &str, seed: u64, resolution: usize, inputs: &[&[u8]], findings: Vec<Finding>) -> Self {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update([0]);
        h.update(seed.to_le_bytes());
        h.update((resolution as u64).to_le_bytes());
        for input in inputs {
            h.update((input.len() as u64).to_le_bytes());
            h.update(input);
        }
        let digest = h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        let exit = if findings.iter().any(|f| f.status.is_bad()) { 1 } else { 0 };
        RunReport {
            command: command.to_string(),
            seed,
            resolution,
            inputs_digest: format!("sha256:{digest}"),
            findings,
            exit,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} ({}, seed {}, resolution {})\n", self.command, self.inputs_digest, self.seed, self.resolution);
        for f in &self.findings {
            let _ = writeln!(out, "{:>18}  {}: {}", f.status.as_str(), f.id, f.details);
            if let Some(c) = &f.claim {
                let _ = writeln!(out, "{:>18}  claim: {c}", "");
            }
        }
        let _ = writeln!(out, "exit {}", self.exit);
        out
    }
}

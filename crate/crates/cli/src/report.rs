use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::Outcome;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
}

/// Every successful command prints exactly one of these.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub tool_version: String,
    pub command: String,
    pub inputs: Value,
    pub outputs: Value,
    pub timings: Option<Timings>,
}

impl ReportEnvelope {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("envelope serializes");
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Failure {
    /// Bad flags or environment.
    Usage(String),
    /// Flags parsed but describe no valid problem, e.g. gcd(p,q) > 1.
    Invalid(String),
    Numeric(String),
    Budget(String),
    Io(String),
}

impl Failure {
    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Invalid(_) => "invalid_input",
            Failure::Numeric(_) => "numeric",
            Failure::Budget(_) => "budget",
            Failure::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) | Failure::Invalid(_) | Failure::Io(_) => EXIT_USAGE,
            Failure::Numeric(_) => EXIT_NUMERIC,
            Failure::Budget(_) => EXIT_BUDGET,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Invalid(m) | Failure::Numeric(m) | Failure::Budget(m) | Failure::Io(m) => m,
        }
    }

    pub fn outcome(&self, command: &str) -> Outcome {
        let body = json!({
            "tool_version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "error": { "kind": self.kind(), "exit_code": self.exit_code(), "message": self.message() },
        });
        let mut stdout = serde_json::to_string_pretty(&body).expect("error serializes");
        stdout.push('\n');
        Outcome { code: self.exit_code(), stdout, stderr: format!("lenscs: {}: {}\n", self.kind(), self.message()) }
    }
}

impl From<lenscs_core::Error> for Failure {
    fn from(e: lenscs_core::Error) -> Self {
        match e {
            lenscs_core::Error::InvalidInput(m) => Failure::Invalid(m),
            lenscs_core::Error::Numeric(m) => Failure::Numeric(m),
            lenscs_core::Error::Budget(m) => Failure::Budget(m),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(Failure::from(lenscs_core::Error::InvalidInput("x".into())).exit_code(), 2);
        assert_eq!(Failure::from(lenscs_core::Error::Numeric("x".into())).exit_code(), 3);
        assert_eq!(Failure::from(lenscs_core::Error::Budget("x".into())).exit_code(), 4);
    }

    #[test]
    fn error_body_is_json() {
        let o = Failure::Budget("too big".into()).outcome("exact-z");
        let v: Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["error"]["kind"], "budget");
        assert_eq!(v["error"]["exit_code"], 4);
        assert_eq!(v["command"], "exact-z");
    }

    #[test]
    fn envelope_round_trips() {
        let e = ReportEnvelope {
            tool_version: "0".into(),
            command: "fan".into(),
            inputs: json!({"p": 2}),
            outputs: json!([1, 2]),
            timings: None,
        };
        let back: ReportEnvelope = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(back, e);
        assert!(e.to_json().contains("\"timings\": null"));
    }
}

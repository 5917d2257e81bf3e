//! Batch front end: instance files in, result files and reports out.

pub mod hilbert;
pub mod instance;
pub mod malg;
pub mod metric;

use eppa::{Error, ErrorClass};
use serde::Serialize;
use serde_json::{json, Value};

use instance::{parse_instance, Instance, Kind, Payload};

pub const DEFAULT_BUDGET_ORDER: usize = 10_000;
pub const DEFAULT_MAX_DEGREE: usize = 6;
pub const DEFAULT_ORACLE_DEPTH: usize = 8;

/// Failure lists in reports are cut to this many entries.
pub const MAX_LISTED: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    BudgetExhausted,
    UnsupportedInstance,
    InvalidInput,
    VerificationFailed,
    InternalError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::InternalError => 1,
            Status::InvalidInput => 2,
            Status::BudgetExhausted => 3,
            Status::UnsupportedInstance => 4,
            Status::VerificationFailed => 5,
        }
    }

    pub fn of_error(e: &Error) -> Status {
        match e.class() {
            ErrorClass::InvalidInput => Status::InvalidInput,
            ErrorClass::Budget => Status::BudgetExhausted,
            ErrorClass::Unsupported => Status::UnsupportedInstance,
            ErrorClass::Internal => Status::InternalError,
        }
    }
}

/// Command-line overrides; unset fields fall back to the file's options,
/// then to the defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Flags {
    pub budget_order: Option<usize>,
    pub max_degree: Option<usize>,
    pub oracle_depth: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Settings {
    pub budget_order: usize,
    pub max_degree: usize,
    pub oracle_depth: usize,
    pub seed: u64,
}

impl Settings {
    pub fn resolve(flags: &Flags, inst: &Instance) -> Settings {
        let o = &inst.options;
        Settings {
            budget_order: flags.budget_order.or(o.budget_order).unwrap_or(DEFAULT_BUDGET_ORDER),
            max_degree: flags.max_degree.or(o.max_degree).unwrap_or(DEFAULT_MAX_DEGREE),
            oracle_depth: flags.oracle_depth.or(o.oracle_depth).unwrap_or(DEFAULT_ORACLE_DEPTH),
            seed: flags.seed.or(o.seed).unwrap_or(0),
        }
    }
}

/// What a command prints or writes, plus its status.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub report: Value,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    /// Pretty JSON with a trailing newline.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).unwrap();
        s.push('\n');
        s
    }

    fn failed(status: Status, kind: Option<Kind>, digest: Option<&str>, message: String) -> Outcome {
        Outcome {
            status,
            report: json!({
                "status": status,
                "kind": kind,
                "instance_digest": digest,
                "error": message,
            }),
        }
    }

    fn from_error(e: &Error, kind: Option<Kind>, digest: Option<&str>) -> Outcome {
        Outcome::failed(Status::of_error(e), kind, digest, e.to_string())
    }
}

/// Verification outcome of one result against its instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checked {
    pub passed: bool,
    pub summary: Value,
    pub failures: Vec<String>,
}

impl Checked {
    fn json(&self) -> Value {
        json!({
            "passed": self.passed,
            "summary": self.summary,
            "failures": self.failures.iter().take(MAX_LISTED).collect::<Vec<_>>(),
            "failure_count": self.failures.len(),
        })
    }
}

fn load(text: &str) -> Result<(Instance, Kind), Outcome> {
    match parse_instance(text) {
        Ok(inst) => {
            let kind = inst.payload.kind();
            Ok((inst, kind))
        }
        Err(e) => Err(Outcome::from_error(&e, None, None)),
    }
}

pub fn cmd_extend(instance_text: &str, flags: &Flags) -> Outcome {
    let (inst, kind) = match load(instance_text) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let settings = Settings::resolve(flags, &inst);
    let built = match &inst.payload {
        Payload::Metric(p) => metric::extend(p, &settings),
        Payload::Malg(p) => malg::extend(p, &settings),
        Payload::Hilbert(p) => hilbert::extend(p, &settings),
    };
    let (result, checked) = match built {
        Ok(x) => x,
        Err(e) => return Outcome::from_error(&e, Some(kind), Some(&inst.digest)),
    };
    let status = if checked.passed { Status::Ok } else { Status::VerificationFailed };
    Outcome {
        status,
        report: json!({
            "status": status,
            "kind": kind,
            "instance_digest": inst.digest,
            "settings": settings,
            "result": result,
            "verification": checked.json(),
        }),
    }
}

pub fn cmd_verify(instance_text: &str, result_text: &str, flags: &Flags) -> Outcome {
    let (inst, kind) = match load(instance_text) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let settings = Settings::resolve(flags, &inst);
    let bad = |m: String| Outcome::failed(Status::InvalidInput, Some(kind), Some(&inst.digest), m);
    let stored: Value = match serde_json::from_str(result_text) {
        Ok(v) => v,
        Err(e) => return bad(format!("result file: {e}")),
    };
    if stored.get("instance_digest").and_then(Value::as_str) != Some(inst.digest.as_str()) {
        return bad("result file was produced from a different instance".into());
    }
    if stored.get("status").and_then(Value::as_str) != Some("ok") {
        return bad("result file does not hold a successful run".into());
    }
    let Some(result) = stored.get("result") else {
        return bad("result file has no result".into());
    };
    let checked = match &inst.payload {
        Payload::Metric(p) => metric::verify(p, result, &settings),
        Payload::Malg(p) => malg::verify(p, result, &settings),
        Payload::Hilbert(p) => hilbert::verify(p, result, &settings),
    };
    let checked = match checked {
        Ok(c) => c,
        Err(e) => return Outcome::from_error(&e, Some(kind), Some(&inst.digest)),
    };
    let status = if checked.passed { Status::Ok } else { Status::VerificationFailed };
    Outcome {
        status,
        report: json!({
            "status": status,
            "kind": kind,
            "instance_digest": inst.digest,
            "verification": checked.json(),
        }),
    }
}

pub fn cmd_oracle(instance_text: &str, flags: &Flags) -> Outcome {
    let (inst, kind) = match load(instance_text) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let Payload::Metric(p) = &inst.payload else {
        return Outcome::failed(
            Status::InvalidInput,
            Some(kind),
            Some(&inst.digest),
            "the oracle runs on metric instances only".into(),
        );
    };
    let settings = Settings::resolve(flags, &inst);
    match metric::oracle(p, &settings) {
        Ok((status, body)) => Outcome {
            status,
            report: json!({
                "status": status,
                "kind": kind,
                "instance_digest": inst.digest,
                "oracle_depth": settings.oracle_depth,
                "oracle": body,
            }),
        },
        Err(e) => Outcome::from_error(&e, Some(kind), Some(&inst.digest)),
    }
}

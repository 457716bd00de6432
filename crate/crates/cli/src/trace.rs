//! Run traces and their two on-disk forms.
//!
//! Structured traces are JSON lines: a `header` object first, one `record`
//! object per row, a `summary` object last. CSV traces open with a `#` line
//! holding the artifact version and config hash, then a column row, then
//! data rows; exact columns are doubled into `name` (decimal) and
//! `name_exact`. Summary lines trail as `#` comments.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use splinter_core::Scalar;

use crate::config::Format;

/// Artifact identifier written into every output file.
pub const ARTIFACT_VERSION: &str = concat!("splinter-cli ", env!("CARGO_PKG_VERSION"));

/// Fractional digits in decimal renderings.
pub const DECIMAL_DIGITS: usize = 12;

/// How a run ended, in order of increasing severity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    BudgetExhausted,
    AssertionFailure,
    ConfigError,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::AssertionFailure => 1,
            Outcome::BudgetExhausted => 2,
            Outcome::ConfigError => 3,
        }
    }

    /// The more severe of the two.
    pub fn worst(self, other: Outcome) -> Outcome {
        self.max(other)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::BudgetExhausted => "budget-exhausted",
            Outcome::AssertionFailure => "assertion-failure",
            Outcome::ConfigError => "config-error",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnKind {
    /// Row index (`step`, `j`, `k`, ...).
    Index,
    /// Exact scalar with its decimal rendering.
    Exact,
    Integer,
    Text,
    Flag,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn new(name: &str, kind: ColumnKind) -> Self {
        Column { name: name.to_string(), kind }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub artifact: String,
    pub config_hash: String,
    /// Canonical config text.
    pub config: String,
    pub command: String,
    pub fixture: Option<String>,
    pub notice: String,
    pub columns: Vec<Column>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Assertion { name: name.to_string(), pass, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Command-specific status, e.g. `converged` or `stalled`.
    pub status: String,
    pub outcome: Outcome,
    pub assertions: Vec<Assertion>,
    pub values: BTreeMap<String, Value>,
    pub error: Option<String>,
}

pub type Record = Map<String, Value>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub header: Header,
    pub records: Vec<Record>,
    pub summary: Summary,
}

/// `{"exact": "...", "decimal": "..."}`.
pub fn exact(x: &Scalar) -> Value {
    json!({ "exact": x.to_string(), "decimal": x.to_decimal(DECIMAL_DIGITS) })
}

/// Exact and decimal strings of an exact cell.
pub fn exact_parts(v: &Value) -> Option<(&str, &str)> {
    Some((v.get("exact")?.as_str()?, v.get("decimal")?.as_str()?))
}

fn plain(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

impl RunTrace {
    pub fn exit_code(&self) -> i32 {
        self.summary.outcome.exit_code()
    }

    /// The `#` line that opens text outputs.
    pub fn header_line(&self) -> String {
        format!("# artifact={} config_sha256={}", self.header.artifact, self.header.config_hash)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Structured => self.to_structured(),
            Format::Csv => self.to_csv(),
        }
    }

    pub fn to_structured(&self) -> String {
        let mut out = String::new();
        let mut push = |tag: &str, v: Value| {
            out.push_str(&json!({ tag: v }).to_string());
            out.push('\n');
        };
        push("header", serde_json::to_value(&self.header).expect("header serializes"));
        for r in &self.records {
            push("record", Value::Object(r.clone()));
        }
        push("summary", serde_json::to_value(&self.summary).expect("summary serializes"));
        out
    }

    pub fn from_structured(text: &str) -> Result<Self, String> {
        let mut header = None;
        let mut records = Vec::new();
        let mut summary = None;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let v: Value = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
            let bad = |what: &str| format!("line {}: {what}", i + 1);
            let Value::Object(mut obj) = v else { return Err(bad("expected an object")) };
            if let Some(h) = obj.remove("header") {
                header = Some(serde_json::from_value(h).map_err(|e| bad(&e.to_string()))?);
            } else if let Some(Value::Object(r)) = obj.remove("record") {
                records.push(r);
            } else if let Some(s) = obj.remove("summary") {
                summary = Some(serde_json::from_value(s).map_err(|e| bad(&e.to_string()))?);
            } else {
                return Err(bad("expected header, record or summary"));
            }
        }
        Ok(RunTrace {
            header: header.ok_or("trace has no header line")?,
            records,
            summary: summary.ok_or("trace has no summary line")?,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut names = Vec::new();
        for c in &self.header.columns {
            names.push(c.name.clone());
            if c.kind == ColumnKind::Exact {
                names.push(format!("{}_exact", c.name));
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&names).expect("in-memory write");
        for r in &self.records {
            let mut row = Vec::new();
            for c in &self.header.columns {
                let v = r.get(&c.name);
                match (c.kind, v.and_then(exact_parts)) {
                    (ColumnKind::Exact, Some((e, d))) => {
                        row.push(d.to_string());
                        row.push(e.to_string());
                    }
                    (ColumnKind::Exact, None) => {
                        row.push(String::new());
                        row.push(String::new());
                    }
                    _ => row.push(plain(v)),
                }
            }
            w.write_record(&row).expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
        let mut out = format!("{}\n{body}", self.header_line());
        let s = &self.summary;
        out.push_str(&format!("# status={} outcome={}\n", s.status, s.outcome));
        for a in &s.assertions {
            out.push_str(&format!("# assert {} {}: {}\n", a.name, if a.pass { "pass" } else { "FAIL" }, a.detail));
        }
        for (k, v) in &s.values {
            out.push_str(&format!("# value {k}={}\n", plain(Some(v))));
        }
        if let Some(e) = &s.error {
            out.push_str(&format!("# error {e}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunTrace {
        let mut r = Record::new();
        r.insert("step".into(), json!(1));
        r.insert("measure_B".into(), exact(&Scalar::from_ratio(1, 4)));
        r.insert("set".into(), json!("0..1/4, 1/2..3/4"));
        RunTrace {
            header: Header {
                artifact: ARTIFACT_VERSION.into(),
                config_hash: "ab".repeat(32),
                config: "command = demo\nsystem = kakutani\n".into(),
                command: "demo".into(),
                fixture: None,
                notice: "n".into(),
                columns: vec![
                    Column::new("step", ColumnKind::Index),
                    Column::new("measure_B", ColumnKind::Exact),
                    Column::new("set", ColumnKind::Text),
                ],
            },
            records: vec![r],
            summary: Summary {
                status: "converged".into(),
                outcome: Outcome::Pass,
                assertions: vec![Assertion::new("mass", true, "ok")],
                values: BTreeMap::new(),
                error: None,
            },
        }
    }

    #[test]
    fn structured_round_trip() {
        let t = sample();
        let text = t.to_structured();
        assert!(text.lines().next().unwrap().contains(ARTIFACT_VERSION));
        assert_eq!(RunTrace::from_structured(&text).unwrap(), t);
    }

    #[test]
    fn csv_layout() {
        let text = sample().to_csv();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# artifact=splinter-cli "));
        assert!(lines[0].ends_with(&"ab".repeat(32)));
        assert_eq!(lines[1], "step,measure_B,measure_B_exact,set");
        assert_eq!(lines[2], "1,0.250000000000,1/4,\"0..1/4, 1/2..3/4\"");
        assert_eq!(lines[3], "# status=converged outcome=pass");
    }

    #[test]
    fn severity_and_exit_codes() {
        assert_eq!(Outcome::Pass.worst(Outcome::BudgetExhausted).exit_code(), 2);
        assert_eq!(Outcome::BudgetExhausted.worst(Outcome::AssertionFailure).exit_code(), 1);
        assert_eq!(Outcome::AssertionFailure.worst(Outcome::ConfigError).exit_code(), 3);
    }
}

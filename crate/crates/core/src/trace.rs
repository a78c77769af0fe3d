//! Line-delimited trace records shared by both engines.
//!
//! Every record has the fixed fields `stage`, `event_kind`, `requirement`,
//! `old_value`, `new_value`. Rationals are written as exact `"p/q"` strings;
//! naturals as decimal strings.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::rational::Rational;
use crate::stream::Side;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("stage {stage}: {message}")]
    Malformed { stage: u64, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    #[serde(rename = "engine")]
    Engine,
    #[serde(rename = "budget")]
    Budget,
    #[serde(rename = "stage")]
    Stage,
    #[serde(rename = "alpha")]
    Alpha,
    #[serde(rename = "eta")]
    Eta,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "c")]
    C,
    #[serde(rename = "d")]
    D,
    #[serde(rename = "q")]
    Q,
    #[serde(rename = "beta_i")]
    BetaI,
    #[serde(rename = "beta")]
    Beta,
    #[serde(rename = "define")]
    Define,
    #[serde(rename = "act")]
    Act,
    #[serde(rename = "initialize")]
    Initialize,
    #[serde(rename = "enumerate_A")]
    EnumerateA,
    #[serde(rename = "enumerate_B")]
    EnumerateB,
}

/// A requirement name such as `L0` or `R3`, ordered by priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Requirement {
    pub index: usize,
    pub side: Side,
}

impl Requirement {
    pub fn l(index: usize) -> Self {
        Requirement { side: Side::L, index }
    }

    pub fn r(index: usize) -> Self {
        Requirement { side: Side::R, index }
    }

    /// 0-based place in the priority list `L0, R0, L1, R1, …`.
    pub fn priority(self) -> usize {
        2 * self.index + usize::from(self.side == Side::R)
    }
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.side, self.index)
    }
}

impl FromStr for Requirement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let side = match s.get(..1) {
            Some("L") => Side::L,
            Some("R") => Side::R,
            _ => return Err(format!("bad requirement {s:?}")),
        };
        let index = s[1..].parse().map_err(|_| format!("bad requirement {s:?}"))?;
        Ok(Requirement { side, index })
    }
}

impl Serialize for Requirement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Requirement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub stage: u64,
    pub event_kind: EventKind,
    pub requirement: Option<Requirement>,
    pub old_value: Option<String>,
    pub new_value: Option<String>,
}

impl TraceEvent {
    pub fn new(stage: usize, kind: EventKind) -> Self {
        TraceEvent {
            stage: stage as u64,
            event_kind: kind,
            requirement: None,
            old_value: None,
            new_value: None,
        }
    }

    pub fn req(mut self, r: Requirement) -> Self {
        self.requirement = Some(r);
        self
    }

    pub fn old(mut self, v: impl ToString) -> Self {
        self.old_value = Some(v.to_string());
        self
    }

    pub fn new_val(mut self, v: impl ToString) -> Self {
        self.new_value = Some(v.to_string());
        self
    }

    pub fn malformed(&self, message: impl Into<String>) -> TraceError {
        TraceError::Malformed {
            stage: self.stage,
            message: format!("{:?} event: {}", self.event_kind, message.into()),
        }
    }

    pub fn requirement(&self) -> Result<Requirement, TraceError> {
        self.requirement.ok_or_else(|| self.malformed("missing requirement"))
    }

    pub fn new_rational(&self) -> Result<Rational, TraceError> {
        parse_field(self, self.new_value.as_deref(), "new_value")
    }

    pub fn old_rational(&self) -> Result<Option<Rational>, TraceError> {
        self.old_value
            .as_deref()
            .map(|v| parse_field(self, Some(v), "old_value"))
            .transpose()
    }

    pub fn new_natural(&self) -> Result<u64, TraceError> {
        parse_field(self, self.new_value.as_deref(), "new_value")
    }

    pub fn old_natural(&self) -> Result<Option<u64>, TraceError> {
        self.old_value
            .as_deref()
            .map(|v| parse_field(self, Some(v), "old_value"))
            .transpose()
    }
}

fn parse_field<T: FromStr>(ev: &TraceEvent, v: Option<&str>, name: &str) -> Result<T, TraceError> {
    let v = v.ok_or_else(|| ev.malformed(format!("missing {name}")))?;
    v.parse()
        .map_err(|_| ev.malformed(format!("cannot parse {name} {v:?}")))
}

pub fn write_jsonl<W: Write>(events: &[TraceEvent], mut out: W) -> Result<(), TraceError> {
    for ev in events {
        serde_json::to_writer(&mut out, ev).map_err(|e| TraceError::Io(e.into()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn to_jsonl(events: &[TraceEvent]) -> String {
    let mut buf = Vec::new();
    write_jsonl(events, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("json is utf-8")
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<TraceEvent>, TraceError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ev = serde_json::from_str(&line).map_err(|source| TraceError::Json { line: i + 1, source })?;
        out.push(ev);
    }
    Ok(out)
}

/// Name of the engine recorded in the trace header.
pub fn engine_name(events: &[TraceEvent]) -> Option<&str> {
    events
        .iter()
        .find(|e| e.event_kind == EventKind::Engine)
        .and_then(|e| e.new_value.as_deref())
}

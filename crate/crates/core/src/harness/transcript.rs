//! JSON-lines event log. The first line is the header.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{FragmentId, GridCoord, Rect};
use crate::potential::Color;

pub const TRANSCRIPT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub version: u32,
    pub algo: String,
    pub strategy: String,
    pub seed: u64,
    #[serde(rename = "T")]
    pub t: u32,
    pub budget: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<i64>,
    #[serde(default)]
    pub backdoor: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<String>,
    /// Strategy parameters and run configuration, echoed verbatim.
    #[serde(default)]
    pub config: serde_json::Value,
}

/// Machine-checkable outcome. Coordinates are in the frame of `frag`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    ImproperEdge { frag: FragmentId, u: GridCoord, v: GridCoord, colors: [Color; 2], spent: u64 },
    PotentialViolation { frag: FragmentId, walk: Vec<GridCoord>, colors: Vec<Color>, p: i64, spent: u64 },
    Survived { spent: u64 },
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::ImproperEdge { .. } => "improper_edge",
            Certificate::PotentialViolation { .. } => "potential_violation",
            Certificate::Survived { .. } => "survived",
        }
    }

    pub fn is_win(&self) -> bool {
        !matches!(self, Certificate::Survived { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "ev", rename_all = "snake_case")]
pub enum Event {
    Header(Header),
    Fragment {
        id: FragmentId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reservation: Option<Rect>,
    },
    /// `comp`/`fxy`: view component and frame position handed to the algorithm;
    /// `new`: cells charged to the budget.
    Reveal { frag: FragmentId, xy: GridCoord, comp: u32, fxy: GridCoord, new: u64 },
    Label { xy: GridCoord, c: Color },
    Commit { a: FragmentId, b: FragmentId, off: GridCoord },
    Note { name: String, data: serde_json::Value },
    Cert(Certificate),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Transcript {
    pub events: Vec<Event>,
}

impl Transcript {
    pub fn header(&self) -> Result<&Header> {
        match self.events.first() {
            Some(Event::Header(h)) => Ok(h),
            _ => Err(Error::Transcript("first line is not a header".into())),
        }
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        self.events.iter().rev().find_map(|e| match e {
            Event::Cert(c) => Some(c),
            _ => None,
        })
    }

    pub fn labels(&self) -> Vec<Color> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Label { c, .. } => Some(*c),
                _ => None,
            })
            .collect()
    }

    pub fn notes<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a serde_json::Value> + 'a {
        self.events.iter().filter_map(move |e| match e {
            Event::Note { name: n, data } if n == name => Some(data),
            _ => None,
        })
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Transcript> {
        let mut events = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let e = serde_json::from_str(line)
                .map_err(|err| Error::Transcript(format!("line {}: {err}", i + 1)))?;
            events.push(e);
        }
        let t = Transcript { events };
        t.header()?;
        Ok(t)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_jsonl())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Transcript> {
        Transcript::from_jsonl(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_wire_format() {
        let e = Event::Label { xy: GridCoord::new(3, -1), c: Color::TWO };
        assert_eq!(serde_json::to_string(&e).unwrap(), r#"{"ev":"label","xy":[3,-1],"c":2}"#);
        let e = Event::Commit { a: FragmentId(0), b: FragmentId(4), off: GridCoord::new(5, 0) };
        assert_eq!(serde_json::to_string(&e).unwrap(), r#"{"ev":"commit","a":0,"b":4,"off":[5,0]}"#);
        let e = Event::Cert(Certificate::Survived { spent: 7 });
        assert_eq!(serde_json::to_string(&e).unwrap(), r#"{"ev":"cert","kind":"survived","spent":7}"#);
    }

    #[test]
    fn roundtrip_and_bad_color() {
        let t = Transcript {
            events: vec![
                Event::Header(Header {
                    version: TRANSCRIPT_VERSION,
                    algo: "greedy".into(),
                    strategy: "log-boost".into(),
                    seed: 1,
                    t: 1,
                    budget: 100,
                    grid: None,
                    backdoor: false,
                    regime: None,
                    config: serde_json::json!({"kappa": 2}),
                }),
                Event::Cert(Certificate::ImproperEdge {
                    frag: FragmentId(0),
                    u: GridCoord::new(0, 0),
                    v: GridCoord::new(1, 0),
                    colors: [Color::ONE, Color::ONE],
                    spent: 9,
                }),
            ],
        };
        let back = Transcript::from_jsonl(&t.to_jsonl()).unwrap();
        assert_eq!(back, t);
        let bad = t.to_jsonl() + "{\"ev\":\"label\",\"xy\":[0,0],\"c\":4}\n";
        assert!(Transcript::from_jsonl(&bad).is_err());
        assert!(Transcript::from_jsonl("{\"ev\":\"label\",\"xy\":[0,0],\"c\":1}\n").is_err());
    }
}

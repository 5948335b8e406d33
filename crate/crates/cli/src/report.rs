//! Command reports with text and JSON renderings.

use std::fmt::Write as _;

use jetsym::condsym::SymmetryVerdict;
use jetsym::expr::Verdict;
use jetsym::geometry::Tri;
use serde::{Deserialize, Serialize};

/// How a single check bears on the exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Negative,
    Unknown,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Negative => 1,
            Status::Unknown => 2,
            Status::Error => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub label: String,
    /// Zero, NonZero, Unknown, Yes, No, ...
    pub verdict: String,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    /// Route or rule the verdict rests on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub justification: Option<String>,
    /// Sampling seed, present whenever the verdict is probabilistic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<String>,
}

impl CheckReport {
    pub fn zero_test(label: impl Into<String>, v: Verdict, seed: u64) -> Self {
        let outcome = match v {
            Verdict::Zero { .. } => Outcome::Pass,
            Verdict::NonZero => Outcome::Fail,
            Verdict::Unknown => Outcome::Unknown,
        };
        let probabilistic = matches!(v, Verdict::Zero { probabilistic: true } | Verdict::Unknown);
        CheckReport {
            label: label.into(),
            verdict: v.to_string(),
            outcome,
            detail: None,
            justification: None,
            seed: probabilistic.then(|| hex(seed)),
        }
    }

    pub fn tri(label: impl Into<String>, t: Tri) -> Self {
        let (verdict, outcome) = match t {
            Tri::Yes => ("Yes", Outcome::Pass),
            Tri::No => ("No", Outcome::Fail),
            Tri::Unknown => ("Unknown", Outcome::Unknown),
        };
        CheckReport { label: label.into(), verdict: verdict.into(), outcome, detail: None, justification: None, seed: None }
    }

    pub fn symmetry(label: impl Into<String>, v: SymmetryVerdict) -> Self {
        let outcome = match v {
            SymmetryVerdict::Yes => Outcome::Pass,
            SymmetryVerdict::No | SymmetryVerdict::Unsatisfiable => Outcome::Fail,
            SymmetryVerdict::Unknown => Outcome::Unknown,
        };
        CheckReport { label: label.into(), verdict: v.to_string(), outcome, detail: None, justification: None, seed: None }
    }

    pub fn flag(label: impl Into<String>, ok: bool, yes: &str, no: &str) -> Self {
        let (verdict, outcome) = if ok { (yes, Outcome::Pass) } else { (no, Outcome::Fail) };
        CheckReport { label: label.into(), verdict: verdict.into(), outcome, detail: None, justification: None, seed: None }
    }

    pub fn unknown(label: impl Into<String>, detail: impl Into<String>) -> Self {
        CheckReport {
            label: label.into(),
            verdict: "Unknown".into(),
            outcome: Outcome::Unknown,
            detail: Some(detail.into()),
            justification: None,
            seed: None,
        }
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub title: String,
    pub lines: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub problem: String,
    pub seed: String,
    pub status: Status,
    pub checks: Vec<CheckReport>,
    pub sections: Vec<Section>,
    pub assumptions: Vec<String>,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn hex(seed: u64) -> String {
    format!("0x{seed:X}")
}

impl Report {
    pub fn new(command: &str, problem: &str, seed: u64) -> Self {
        Report {
            command: command.into(),
            problem: problem.into(),
            seed: hex(seed),
            status: Status::Ok,
            checks: vec![],
            sections: vec![],
            assumptions: vec![],
            notes: vec![],
            error: None,
        }
    }

    pub fn section(&mut self, title: impl Into<String>, lines: Vec<String>) {
        self.sections.push(Section { title: title.into(), lines });
    }

    /// Sets the status from the checks: any failure wins over any unknown.
    pub fn settle(&mut self) {
        self.status = if self.error.is_some() {
            Status::Error
        } else if self.checks.iter().any(|c| c.outcome == Outcome::Fail) {
            Status::Negative
        } else if self.checks.iter().any(|c| c.outcome == Outcome::Unknown) {
            Status::Unknown
        } else {
            Status::Ok
        };
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "jetsym {} {}", self.command, self.problem);
        let _ = writeln!(out, "seed {}", self.seed);
        if let Some(e) = &self.error {
            let _ = writeln!(out, "error: {e}");
        }
        for s in &self.sections {
            let _ = writeln!(out, "\n{}:", s.title);
            for l in &s.lines {
                let _ = writeln!(out, "  {l}");
            }
        }
        if !self.checks.is_empty() {
            let _ = writeln!(out, "\nchecks:");
            for c in &self.checks {
                let _ = write!(out, "  [{}] {}: {}", tag(c.outcome), c.label, c.verdict);
                if let Some(j) = &c.justification {
                    let _ = write!(out, " (by {j})");
                }
                if let Some(s) = &c.seed {
                    let _ = write!(out, " [seed {s}]");
                }
                out.push('\n');
                if let Some(d) = &c.detail {
                    let _ = writeln!(out, "      {d}");
                }
            }
        }
        for (title, items) in [("assumptions", &self.assumptions), ("notes", &self.notes)] {
            if !items.is_empty() {
                let _ = writeln!(out, "\n{title}:");
                for i in items {
                    let _ = writeln!(out, "  - {i}");
                }
            }
        }
        let _ = writeln!(out, "\nstatus: {:?} (exit {})", self.status, self.exit_code());
        out
    }
}

fn tag(o: Outcome) -> &'static str {
    match o {
        Outcome::Pass => "ok",
        Outcome::Fail => "FAIL",
        Outcome::Unknown => "??",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_precedence() {
        let mut r = Report::new("c", "p", 1);
        r.checks.push(CheckReport::unknown("a", "?"));
        r.settle();
        assert_eq!(r.exit_code(), 2);
        r.checks.push(CheckReport::zero_test("b", Verdict::NonZero, 1));
        r.settle();
        assert_eq!(r.exit_code(), 1);
        r.error = Some("boom".into());
        r.settle();
        assert_eq!(r.exit_code(), 3);
    }

    #[test]
    fn probabilistic_verdicts_carry_seed() {
        assert_eq!(CheckReport::zero_test("x", Verdict::Zero { probabilistic: true }, 0xAB).seed.as_deref(), Some("0xAB"));
        assert_eq!(CheckReport::zero_test("x", Verdict::Zero { probabilistic: false }, 0xAB).seed, None);
    }

    #[test]
    fn json_round_trip() {
        let mut r = Report::new("compatibility", "x.jetsym", 7);
        r.checks.push(CheckReport::tri("involutive", Tri::No).with_detail("d"));
        r.section("s", vec!["a".into()]);
        r.settle();
        let j = r.to_json();
        let back = Report::from_json(&j).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), j);
    }
}

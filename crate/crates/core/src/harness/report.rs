use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::Mem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Ok,
    Violated,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Ok => "ok",
            Verdict::Violated => "violated",
        })
    }
}

/// A concrete witness for a violation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<usize>>,
    pub init_mems: Vec<Mem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thread: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pc: Option<usize>,
    pub predicate: String,
    pub detail: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub perturbations: Vec<String>,
}

impl Counterexample {
    pub fn new(predicate: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            predicate: predicate.into(),
            detail: detail.into(),
            ..Self::default()
        }
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.predicate, self.detail)?;
        if let Some(s) = &self.schedule {
            write!(f, "\n  schedule: {s:?}")?;
        }
        for (i, m) in self.init_mems.iter().enumerate() {
            write!(f, "\n  initial memory {}: {m}", i + 1)?;
        }
        if let Some(s) = self.step {
            write!(f, "\n  step: {s}")?;
        }
        if let Some(t) = self.thread {
            write!(f, "\n  thread: {t}")?;
        }
        if let Some(pc) = self.pc {
            write!(f, "\n  pc: {pc}")?;
        }
        for p in &self.perturbations {
            write!(f, "\n  perturbation: {p}")?;
        }
        Ok(())
    }
}

/// Outcome of one bounded check. Verdict `ok` means no violation was found
/// within the stated bounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub check: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<String>,
    pub verdict: Verdict,
    pub bounds: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub explored: BTreeMap<String, u64>,
}

impl CheckReport {
    pub fn ok(check: &str) -> Self {
        Self {
            check: check.to_string(),
            level: None,
            verdict: Verdict::Ok,
            bounds: BTreeMap::new(),
            counterexample: None,
            diagnostics: Vec::new(),
            notes: Vec::new(),
            explored: BTreeMap::new(),
        }
    }

    pub fn violated(check: &str, cex: Counterexample) -> Self {
        Self {
            verdict: Verdict::Violated,
            counterexample: Some(cex),
            ..Self::ok(check)
        }
    }

    pub fn is_ok(&self) -> bool {
        self.verdict == Verdict::Ok
    }

    pub fn with_level(mut self, level: &str) -> Self {
        self.level = Some(level.to_string());
        self
    }

    pub fn bound(mut self, key: &str, value: impl ToString) -> Self {
        self.bounds.insert(key.to_string(), value.to_string());
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn count(&mut self, key: &str, n: u64) {
        *self.explored.entry(key.to_string()).or_insert(0) += n;
    }

    /// Combines partial reports in order: the first violation wins, counts
    /// add up, diagnostics are kept once each.
    pub fn merge(check: &str, parts: impl IntoIterator<Item = CheckReport>) -> CheckReport {
        let mut out = CheckReport::ok(check);
        for p in parts {
            if out.level.is_none() {
                out.level = p.level.clone();
            }
            if out.counterexample.is_none() && p.verdict == Verdict::Violated {
                out.verdict = Verdict::Violated;
                out.counterexample = p.counterexample;
            }
            for (k, v) in p.explored {
                out.count(&k, v);
            }
            for d in p.diagnostics {
                if !out.diagnostics.contains(&d) {
                    out.diagnostics.push(d);
                }
            }
            for n in p.notes {
                if !out.notes.contains(&n) {
                    out.notes.push(n);
                }
            }
            for (k, v) in p.bounds {
                out.bounds.entry(k).or_insert(v);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// One-line summary followed by the counterexample, if any.
    pub fn summary(&self) -> String {
        let level = self.level.as_deref().map(|l| format!(" [{l}]")).unwrap_or_default();
        let bounds: Vec<String> = self.bounds.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let mut s = format!("{}{}: {} ({})", self.check, level, self.verdict, bounds.join(", "));
        if let Some(c) = &self.counterexample {
            s.push_str(&format!("\n  {c}"));
        }
        for d in &self.diagnostics {
            s.push_str(&format!("\n  diagnostic: {d}"));
        }
        s
    }
}

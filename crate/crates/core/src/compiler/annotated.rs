//! JSON form of a compilation: each instruction with its label and the
//! compilation record in force before it. Expressions are rendered in source
//! syntax and parsed back on load.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::cmd::{AnnotatedInstr, CompileOutput};
use super::records::{AsmRec, CompRec, RegRec};
use crate::lang::parse_expr;
use crate::model::Var;
use crate::risc::{Instr, Label};

#[derive(Debug, Error)]
pub enum AnnotatedJsonError {
    #[error("malformed annotated JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("instruction {index}: {message}")]
    Entry { index: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsmJson {
    pub no_w: Vec<String>,
    pub no_rw: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecJson {
    /// Register name (`r0`) to expression text.
    pub regrec: BTreeMap<String, String>,
    pub asmrec: AsmJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstrJson {
    pub label: Option<Label>,
    pub instr: String,
    #[serde(flatten)]
    pub rec: RecJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedJson {
    pub format: String,
    pub registers: usize,
    pub exit_label: Option<Label>,
    pub next_label: Label,
    pub instructions: Vec<InstrJson>,
    #[serde(rename = "final")]
    pub final_rec: RecJson,
}

fn rec_to_json(rec: &CompRec) -> RecJson {
    let names = |s: &std::collections::BTreeSet<Var>| s.iter().map(|v| v.to_string()).collect();
    RecJson {
        regrec: rec
            .regrec
            .iter()
            .map(|(r, e)| (format!("r{r}"), e.to_string()))
            .collect(),
        asmrec: AsmJson {
            no_w: names(&rec.asmrec.no_w),
            no_rw: names(&rec.asmrec.no_rw),
        },
    }
}

fn rec_from_json(j: &RecJson) -> Result<CompRec, String> {
    let mut regrec = RegRec::new();
    for (r, e) in &j.regrec {
        let reg = r
            .strip_prefix('r')
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| format!("bad register `{r}`"))?;
        let expr = parse_expr(e).map_err(|err| format!("expression `{e}`: {err}"))?;
        regrec.insert(reg, expr);
    }
    let vars = |v: &Vec<String>| v.iter().map(|s| Var::new(s)).collect();
    Ok(CompRec {
        regrec,
        asmrec: AsmRec {
            no_w: vars(&j.asmrec.no_w),
            no_rw: vars(&j.asmrec.no_rw),
        },
    })
}

impl AnnotatedJson {
    pub fn from_output(out: &CompileOutput, registers: usize) -> Self {
        Self {
            format: crate::FORMAT_VERSION.to_string(),
            registers,
            exit_label: out.exit_label,
            next_label: out.next_label,
            instructions: out
                .annotated
                .iter()
                .map(|a| InstrJson {
                    label: a.label,
                    instr: if a.epilogue && a.instr == Instr::Nop {
                        "nop'".into()
                    } else {
                        a.instr.to_string()
                    },
                    rec: rec_to_json(&a.rec),
                })
                .collect(),
            final_rec: rec_to_json(&out.final_rec),
        }
    }

    pub fn to_output(&self) -> Result<CompileOutput, AnnotatedJsonError> {
        let mut annotated = Vec::with_capacity(self.instructions.len());
        for (index, ij) in self.instructions.iter().enumerate() {
            let entry = |message: String| AnnotatedJsonError::Entry { index, message };
            let (instr, primed) = Instr::parse(&ij.instr).map_err(entry)?;
            let rec = rec_from_json(&ij.rec).map_err(entry)?;
            annotated.push(AnnotatedInstr {
                label: ij.label,
                epilogue: primed || matches!(instr, Instr::Jmp(_)),
                instr,
                rec,
            });
        }
        let final_rec = rec_from_json(&self.final_rec).map_err(|message| AnnotatedJsonError::Entry {
            index: self.instructions.len(),
            message,
        })?;
        Ok(CompileOutput {
            annotated,
            exit_label: self.exit_label,
            next_label: self.next_label,
            final_rec,
            failed: false,
            error: None,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("annotated JSON serializes")
    }

    pub fn parse(text: &str) -> Result<Self, AnnotatedJsonError> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile;
    use crate::lang::parse_cmd;
    use crate::model::{LockInterp, Policy};

    #[test]
    fn round_trip() {
        let p = Policy::from_spec(
            &[("v", "low"), ("x", "low")],
            LockInterp::new().with_lock("k", &["v"], &[]),
        )
        .unwrap();
        let c = parse_cmd("acquire(k); if v + 1 < 3 then x := v * 2 else skip fi; release(k)").unwrap();
        let compiled = compile(&c, &p, 8).unwrap();
        let j = AnnotatedJson::from_output(&compiled.output, 8);
        let text = j.to_json_string();
        let back = AnnotatedJson::parse(&text).unwrap();
        assert_eq!(back, j);
        assert_eq!(back.to_output().unwrap(), compiled.output);
    }

    #[test]
    fn bad_expression_reported() {
        let text = r#"{"format":"1","registers":8,"exit_label":null,"next_label":0,
            "instructions":[{"label":null,"instr":"nop","regrec":{"r0":"x +"},"asmrec":{"no_w":[],"no_rw":[]}}],
            "final":{"regrec":{},"asmrec":{"no_w":[],"no_rw":[]}}}"#;
        let j = AnnotatedJson::parse(text).unwrap();
        assert!(matches!(j.to_output(), Err(AnnotatedJsonError::Entry { index: 0, .. })));
    }
}

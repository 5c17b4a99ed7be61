use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use thiserror::Error;

use super::isa::{Instr, Label};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProgramError {
    #[error("label L{0} is bound more than once")]
    DuplicateLabel(Label),
    #[error("label L{0} is not bound")]
    UnboundLabel(Label),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// A RISC program: labelled instructions plus the resolved label map.
///
/// The optional exit label resolves to the program length, so jumping to it
/// terminates the program. Epilogue no-ops (printed `nop'`) are recorded so
/// pacing can tell them apart from no-ops compiled from `skip`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RiscProgram {
    instrs: Vec<(Option<Label>, Instr)>,
    labels: BTreeMap<Label, usize>,
    exit_label: Option<Label>,
    epilogue_nops: BTreeSet<usize>,
}

impl RiscProgram {
    pub fn new(
        instrs: Vec<(Option<Label>, Instr)>,
        exit_label: Option<Label>,
        epilogue_nops: BTreeSet<usize>,
    ) -> Result<Self, ProgramError> {
        let mut labels = BTreeMap::new();
        for (i, (l, _)) in instrs.iter().enumerate() {
            if let Some(l) = l {
                if labels.insert(*l, i).is_some() || Some(*l) == exit_label {
                    return Err(ProgramError::DuplicateLabel(*l));
                }
            }
        }
        let len = instrs.len();
        let prog = Self {
            instrs,
            labels,
            exit_label,
            epilogue_nops: epilogue_nops.into_iter().filter(|i| *i < len).collect(),
        };
        for (_, ins) in &prog.instrs {
            if let Some(l) = ins.jump_target() {
                prog.resolve(l)?;
            }
        }
        Ok(prog)
    }

    /// Straight-line program without labels.
    pub fn from_instrs(instrs: Vec<Instr>) -> Self {
        Self::new(instrs.into_iter().map(|i| (None, i)).collect(), None, BTreeSet::new())
            .expect("label-free programs are well formed")
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    pub fn instrs(&self) -> &[(Option<Label>, Instr)] {
        &self.instrs
    }

    pub fn instr(&self, pc: usize) -> Option<&Instr> {
        self.instrs.get(pc).map(|(_, i)| i)
    }

    pub fn exit_label(&self) -> Option<Label> {
        self.exit_label
    }

    pub fn labels(&self) -> &BTreeMap<Label, usize> {
        &self.labels
    }

    pub fn resolve(&self, l: Label) -> Result<usize, ProgramError> {
        if let Some(i) = self.labels.get(&l) {
            return Ok(*i);
        }
        if self.exit_label == Some(l) {
            return Ok(self.instrs.len());
        }
        Err(ProgramError::UnboundLabel(l))
    }

    /// Jumps and primed no-ops: the bookkeeping steps that have no source
    /// counterpart.
    pub fn is_epilogue(&self, pc: usize) -> bool {
        match self.instr(pc) {
            Some(Instr::Jmp(_)) => true,
            Some(Instr::Nop) => self.epilogue_nops.contains(&pc),
            _ => false,
        }
    }

    pub fn epilogue_nops(&self) -> &BTreeSet<usize> {
        &self.epilogue_nops
    }

    /// Assembly listing: one instruction per line with `Ln:` prefixes and a
    /// trailing label line when the exit label is bound.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        for (i, (l, ins)) in self.instrs.iter().enumerate() {
            let prefix = l.map(|l| format!("L{l}:")).unwrap_or_default();
            let text = if matches!(ins, Instr::Nop) && self.epilogue_nops.contains(&i) {
                "nop'".to_string()
            } else {
                ins.to_string()
            };
            let _ = writeln!(out, "{prefix:<8}{text}");
        }
        if let Some(l) = self.exit_label {
            let _ = writeln!(out, "L{l}:");
        }
        out
    }

    /// Parses a listing. A label on a line of its own applies to the next
    /// instruction, or is the exit label when nothing follows. `#` starts a
    /// comment.
    pub fn parse_listing(text: &str) -> Result<Self, ProgramError> {
        let mut instrs = Vec::new();
        let mut epilogue = BTreeSet::new();
        let mut pending: Option<(Label, usize)> = None;
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let syntax = |message: String| ProgramError::Syntax { line: line_no, message };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (label, rest) = match line.split_once(':') {
                Some((l, rest)) => {
                    let l = l
                        .trim()
                        .strip_prefix('L')
                        .and_then(|x| x.parse::<Label>().ok())
                        .ok_or_else(|| syntax(format!("bad label `{}`", l.trim())))?;
                    (Some(l), rest.trim())
                }
                None => (None, line),
            };
            if let Some(l) = label {
                if pending.is_some() {
                    return Err(syntax("two labels for one instruction".into()));
                }
                pending = Some((l, line_no));
            }
            if rest.is_empty() {
                continue;
            }
            let (ins, primed) = Instr::parse(rest).map_err(syntax)?;
            if primed {
                epilogue.insert(instrs.len());
            }
            instrs.push((pending.take().map(|(l, _)| l), ins));
        }
        let exit = pending.map(|(l, _)| l);
        Self::new(instrs, exit, epilogue)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Var;

    #[test]
    fn resolve_examples() {
        let p = RiscProgram::new(vec![(Some(3), Instr::Nop)], None, BTreeSet::new()).unwrap();
        assert_eq!(p.resolve(3), Ok(0));
        assert_eq!(p.resolve(99), Err(ProgramError::UnboundLabel(99)));
    }

    #[test]
    fn exit_label_resolves_to_length() {
        let p = RiscProgram::new(vec![(None, Instr::Jmp(1))], Some(1), BTreeSet::new()).unwrap();
        assert_eq!(p.resolve(1), Ok(1));
    }

    #[test]
    fn duplicate_and_unbound_labels_rejected() {
        let dup = RiscProgram::new(
            vec![(Some(1), Instr::Nop), (Some(1), Instr::Nop)],
            None,
            BTreeSet::new(),
        );
        assert_eq!(dup, Err(ProgramError::DuplicateLabel(1)));
        let unbound = RiscProgram::new(vec![(None, Instr::Jmp(4))], None, BTreeSet::new());
        assert_eq!(unbound, Err(ProgramError::UnboundLabel(4)));
    }

    #[test]
    fn listing_round_trip() {
        let p = RiscProgram::new(
            vec![
                (None, Instr::Load(0, Var::new("v"))),
                (None, Instr::Jz(0, 0)),
                (None, Instr::Nop),
                (None, Instr::Jmp(1)),
                (Some(0), Instr::Nop),
                (None, Instr::Nop),
            ],
            Some(1),
            BTreeSet::from([5]),
        )
        .unwrap();
        let text = p.listing();
        assert!(text.contains("nop'"));
        assert!(text.trim_end().ends_with("L1:"));
        assert_eq!(RiscProgram::parse_listing(&text).unwrap(), p);
        assert!(p.is_epilogue(3) && p.is_epilogue(5) && !p.is_epilogue(2));
    }

    #[test]
    fn listing_syntax_errors() {
        let e = RiscProgram::parse_listing("nop\nL1: L2: nop").unwrap_err();
        assert!(matches!(e, ProgramError::Syntax { line: 2, .. }));
        let e = RiscProgram::parse_listing("load r0").unwrap_err();
        assert!(matches!(e, ProgramError::Syntax { line: 1, .. }));
    }
}

use std::collections::BTreeSet;
use std::sync::Arc;

use super::expr::compile_expr;
use super::records::{regrec_stable, var_stable, CompRec};
use super::stability::{governance, stability_checks};
use super::{CompileCtx, CompileError};
use crate::lang::{Cmd, Expr};
use crate::model::Policy;
use crate::risc::{Instr, Label, ProgramError, RiscProgram};

/// One emitted instruction with the compilation record in force before it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotatedInstr {
    pub label: Option<Label>,
    pub instr: Instr,
    pub rec: CompRec,
    /// Bookkeeping jump or primed no-op with no source counterpart.
    pub epilogue: bool,
}

/// Result of [`compile_cmd`]. When `failed` holds, `annotated` is empty and
/// `error` names the reason.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompileOutput {
    pub annotated: Vec<AnnotatedInstr>,
    pub exit_label: Option<Label>,
    pub next_label: Label,
    pub final_rec: CompRec,
    pub failed: bool,
    pub error: Option<CompileError>,
}

impl CompileOutput {
    fn failure(rec: &CompRec, nl: Label, err: CompileError) -> Self {
        Self {
            annotated: Vec::new(),
            exit_label: None,
            next_label: nl,
            final_rec: rec.clone(),
            failed: true,
            error: Some(err),
        }
    }

    /// Record in force before the instruction at `pc`, or the final record
    /// once execution has run off the end.
    pub fn rec_at(&self, pc: usize) -> &CompRec {
        self.annotated.get(pc).map(|a| &a.rec).unwrap_or(&self.final_rec)
    }

    pub fn instrs(&self) -> Vec<(Option<Label>, Instr)> {
        self.annotated.iter().map(|a| (a.label, a.instr.clone())).collect()
    }
}

struct Frag {
    code: Vec<AnnotatedInstr>,
    exit: Option<Label>,
    nl: Label,
    rec: CompRec,
}

/// Compiles `c` starting from record `rec`, with `label` attached to the
/// first instruction and fresh labels drawn from `nl` upwards.
pub fn compile_cmd(ctx: CompileCtx<'_>, rec: &CompRec, label: Option<Label>, nl: Label, c: &Cmd) -> CompileOutput {
    let pre = || -> Result<(), CompileError> {
        if c.contains_stop() {
            return Err(CompileError::Precondition("`stop` in source program".into()));
        }
        if let Some(l) = label {
            if l >= nl {
                return Err(CompileError::Precondition(format!(
                    "incoming label L{l} is not below the next fresh label L{nl}"
                )));
            }
        }
        if !regrec_stable(rec, ctx.policy) {
            return Err(CompileError::Precondition(
                "incoming register record mentions unstable variables".into(),
            ));
        }
        stability_checks(c, &rec.asmrec, ctx.policy)?;
        Ok(())
    };
    if let Err(e) = pre() {
        return CompileOutput::failure(rec, nl, e);
    }
    match comp(ctx, rec, label, nl, c) {
        Ok(f) => CompileOutput {
            annotated: f.code,
            exit_label: f.exit,
            next_label: f.nl,
            final_rec: f.rec,
            failed: false,
            error: None,
        },
        Err(e) => CompileOutput::failure(rec, nl, e),
    }
}

fn instr(label: Option<Label>, instr: Instr, rec: &CompRec) -> AnnotatedInstr {
    AnnotatedInstr {
        label,
        instr,
        rec: rec.clone(),
        epilogue: false,
    }
}

fn epilogue(label: Option<Label>, i: Instr, rec: &CompRec) -> AnnotatedInstr {
    AnnotatedInstr {
        epilogue: true,
        ..instr(label, i, rec)
    }
}

fn comp(ctx: CompileCtx<'_>, rec: &CompRec, l: Option<Label>, nl: Label, c: &Cmd) -> Result<Frag, CompileError> {
    let policy = ctx.policy;
    match c {
        Cmd::Stop => Err(CompileError::Precondition("`stop` in source program".into())),
        Cmd::Skip => Ok(Frag {
            code: vec![instr(l, Instr::Nop, rec)],
            exit: None,
            nl,
            rec: rec.clone(),
        }),
        Cmd::Assign(v, e) => {
            if policy.interp().is_governed(v) && !var_stable(&rec.asmrec, policy, v) {
                return Err(CompileError::UnprotectedWrite(v.to_string()));
            }
            let pe = compile_expr(ctx, rec, &BTreeSet::new(), l, e)?;
            let mut code = pe.code;
            code.push(instr(pe.label, Instr::Store(v.clone(), pe.reg), &pe.rec));
            let mut out = pe.rec;
            out.regrec.retain(|_, x| !x.mentions(v));
            if var_stable(&out.asmrec, policy, v) {
                out.regrec.insert(pe.reg, Expr::Var(v.clone()));
            }
            Ok(Frag {
                code,
                exit: None,
                nl,
                rec: out,
            })
        }
        Cmd::Seq(a, b) => {
            let fa = comp(ctx, rec, l, nl, a)?;
            let fb = comp(ctx, &fa.rec, fa.exit, fa.nl, b)?;
            let mut code = fa.code;
            code.extend(fb.code);
            Ok(Frag {
                code,
                exit: fb.exit,
                nl: fb.nl,
                rec: fb.rec,
            })
        }
        Cmd::If(e, a, b) => {
            let (br, ex) = (nl, nl + 1);
            let pe = compile_expr(ctx, rec, &BTreeSet::new(), l, e)?;
            let c1 = pe.rec;
            let f1 = comp(ctx, &c1, None, nl + 2, a)?;
            let f2 = comp(ctx, &c1, Some(br), f1.nl, b)?;
            if f1.rec.asmrec != f2.rec.asmrec {
                return Err(CompileError::BranchLockMismatch);
            }
            let mut code = pe.code;
            code.push(instr(pe.label, Instr::Jz(br, pe.reg), &c1));
            code.extend(f1.code);
            code.push(epilogue(f1.exit, Instr::Jmp(ex), &f1.rec));
            code.extend(f2.code);
            code.push(epilogue(f2.exit, Instr::Nop, &f2.rec));
            Ok(Frag {
                code,
                exit: Some(ex),
                nl: f2.nl,
                rec: CompRec {
                    regrec: CompRec::meet_regrec(&f1.rec.regrec, &f2.rec.regrec),
                    asmrec: f1.rec.asmrec,
                },
            })
        }
        Cmd::While(e, body) => {
            let (head, ex, nl) = match l {
                Some(lh) => (lh, nl, nl + 1),
                None => (nl, nl + 1, nl + 2),
            };
            let flushed = CompRec {
                regrec: Default::default(),
                asmrec: rec.asmrec.clone(),
            };
            let pe = compile_expr(ctx, &flushed, &BTreeSet::new(), Some(head), e)?;
            debug_assert!(pe.label.is_none(), "flushed guard always emits code");
            let c1 = pe.rec;
            let fb = comp(ctx, &c1, None, nl, body)?;
            if fb.rec.asmrec != rec.asmrec {
                return Err(CompileError::LoopLockMismatch);
            }
            let mut code = pe.code;
            code.push(instr(None, Instr::Jz(ex, pe.reg), &c1));
            code.extend(fb.code);
            code.push(epilogue(fb.exit, Instr::Jmp(head), &fb.rec));
            Ok(Frag {
                code,
                exit: Some(ex),
                nl: fb.nl,
                rec: c1,
            })
        }
        Cmd::LockAcq(k) => {
            let g = governance(policy, k)?;
            let out = CompRec {
                regrec: rec.regrec.clone(),
                asmrec: rec.asmrec.acquire(g),
            };
            Ok(Frag {
                code: vec![instr(l, Instr::LockAcq(k.clone()), rec)],
                exit: None,
                nl,
                rec: out,
            })
        }
        Cmd::LockRel(k) => {
            let g = governance(policy, k)?;
            let asmrec = rec.asmrec.release(g);
            let regrec = rec
                .regrec
                .iter()
                .filter(|(_, e)| e.vars().iter().all(|v| var_stable(&asmrec, policy, v)))
                .map(|(r, e)| (*r, e.clone()))
                .collect();
            Ok(Frag {
                code: vec![instr(l, Instr::LockRel(k.clone()), rec)],
                exit: None,
                nl,
                rec: CompRec { regrec, asmrec },
            })
        }
    }
}

/// Strips annotations and resolves labels, binding the dangling exit label to
/// the end of the program.
pub fn finalize(out: &CompileOutput) -> Result<RiscProgram, ProgramError> {
    let epilogue_nops = out
        .annotated
        .iter()
        .enumerate()
        .filter(|(_, a)| a.epilogue && matches!(a.instr, Instr::Nop))
        .map(|(i, _)| i)
        .collect();
    RiscProgram::new(out.instrs(), out.exit_label, epilogue_nops)
}

/// A successful top-level compilation.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub output: CompileOutput,
    pub program: Arc<RiscProgram>,
    pub registers: usize,
}

/// Compiles a whole thread from the empty record and finalizes it.
pub fn compile(c: &Cmd, policy: &Policy, registers: usize) -> Result<Compiled, CompileError> {
    let ctx = CompileCtx::new(policy, registers);
    let output = compile_cmd(ctx, &CompRec::initial(), None, 0, c);
    if let Some(e) = output.error.clone() {
        return Err(e);
    }
    let program = finalize(&output).map_err(|e| CompileError::Precondition(format!("finalize: {e}")))?;
    Ok(Compiled {
        output,
        program: Arc::new(program),
        registers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_cmd;
    use crate::model::{LockInterp, Var};

    fn policy() -> Policy {
        Policy::from_spec(
            &[("v", "low"), ("x", "low"), ("y", "low"), ("s", "low")],
            LockInterp::new()
                .with_lock("k", &["y"], &[])
                .with_lock("p", &[], &["v", "s"]),
        )
        .unwrap()
    }

    fn ctx(p: &Policy) -> CompileCtx<'_> {
        CompileCtx::new(p, 8)
    }

    #[test]
    fn skip_case() {
        let p = policy();
        let out = compile_cmd(ctx(&p), &CompRec::initial(), None, 0, &Cmd::Skip);
        assert!(!out.failed);
        assert_eq!(out.instrs(), vec![(None, Instr::Nop)]);
        assert_eq!((out.exit_label, out.next_label), (None, 0));
        assert_eq!(out.final_rec, CompRec::initial());
    }

    #[test]
    fn unstable_assignment_fails() {
        let p = policy();
        let out = compile_cmd(ctx(&p), &CompRec::initial(), None, 0, &parse_cmd("x := y").unwrap());
        assert!(out.failed);
        assert!(out.annotated.is_empty());
        assert_eq!(out.error, Some(CompileError::UnstableRead("y".into())));
    }

    #[test]
    fn conditional_shape() {
        let p = policy();
        let c = parse_cmd("acquire(p); if v != 0 then skip else skip fi").unwrap();
        let out = compile_cmd(ctx(&p), &CompRec::initial(), None, 0, &c);
        assert!(!out.failed, "{:?}", out.error);
        let got: Vec<String> = out
            .annotated
            .iter()
            .map(|a| {
                let l = a.label.map(|l| format!("L{l}: ")).unwrap_or_default();
                let prime = if a.epilogue && a.instr == Instr::Nop { "'" } else { "" };
                format!("{l}{}{prime}", a.instr)
            })
            .collect();
        assert_eq!(
            got,
            [
                "acquire p",
                "load r0 v",
                "movk r1 0",
                "op != r0 r1",
                "jz L0 r0",
                "nop",
                "jmp L1",
                "L0: nop",
                "nop'"
            ]
        );
        assert_eq!(out.exit_label, Some(1));
        assert_eq!(out.next_label, 2);
        let prog = finalize(&out).unwrap();
        assert_eq!(prog.resolve(1), Ok(prog.len()));
    }

    #[test]
    fn assignment_caches_stored_value() {
        let p = policy();
        let c = parse_cmd("acquire(p); v := 3; s := v").unwrap();
        let out = compile_cmd(ctx(&p), &CompRec::initial(), None, 0, &c);
        let instrs: Vec<Instr> = out.annotated.iter().map(|a| a.instr.clone()).collect();
        // the second assignment reuses the register holding v
        assert_eq!(instrs.iter().filter(|i| matches!(i, Instr::Load(..))).count(), 0);
        assert_eq!(out.final_rec.regrec.get(&0), Some(&Expr::Var(Var::new("s"))));
    }

    #[test]
    fn release_flushes_unstable_entries() {
        let p = policy();
        let c = parse_cmd("acquire(k); x := y; release(k)").unwrap();
        let out = compile_cmd(ctx(&p), &CompRec::initial(), None, 0, &c);
        assert!(!out.failed);
        assert!(out.final_rec.regrec.is_empty());
    }

    #[test]
    fn while_loop_labels() {
        let p = policy();
        let c = parse_cmd("acquire(p); while v < 3 do v := v + 1 od").unwrap();
        let out = compile_cmd(ctx(&p), &CompRec::initial(), None, 0, &c);
        assert!(!out.failed);
        let prog = finalize(&out).unwrap();
        assert_eq!(prog.labels().get(&0), Some(&1));
        assert_eq!(out.exit_label, Some(1));
        assert!(matches!(out.annotated.last().unwrap().instr, Instr::Jmp(0)));
        assert!(out.annotated[1].rec.regrec.is_empty());
    }

    #[test]
    fn incoming_label_must_be_below_next() {
        let p = policy();
        let out = compile_cmd(ctx(&p), &CompRec::initial(), Some(3), 3, &Cmd::Skip);
        assert!(matches!(out.error, Some(CompileError::Precondition(_))));
    }
}

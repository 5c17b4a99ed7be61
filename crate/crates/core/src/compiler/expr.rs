use std::collections::BTreeSet;

use super::cmd::AnnotatedInstr;
use super::records::{var_stable, CompRec};
use super::regalloc::{reg_alloc, reg_alloc_cached};
use super::{CompileCtx, CompileError};
use crate::lang::Expr;
use crate::risc::{Instr, Label, Reg};

/// Result of compiling an expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExprOutput {
    pub code: Vec<AnnotatedInstr>,
    pub reg: Reg,
    pub rec: CompRec,
    /// The incoming label when no code was emitted to carry it.
    pub label: Option<Label>,
}

/// Compiles `e` into a register outside `in_use`, attaching `label` to the
/// first emitted instruction.
pub fn compile_expr(
    ctx: CompileCtx<'_>,
    rec: &CompRec,
    in_use: &BTreeSet<Reg>,
    label: Option<Label>,
    e: &Expr,
) -> Result<ExprOutput, CompileError> {
    let mut code = Vec::new();
    let mut label = label;
    let exhausted = || CompileError::RegisterExhaustion(ctx.registers);
    let (reg, out_rec) = match e {
        Expr::Const(n) => {
            let r = reg_alloc(&rec.regrec, in_use, ctx.registers).ok_or_else(exhausted)?;
            emit(&mut code, &mut label, Instr::MoveK(r, *n), rec);
            let mut next = rec.clone();
            next.regrec.insert(r, e.clone());
            (r, next)
        }
        Expr::Var(v) => {
            if !ctx.policy.is_declared(v) {
                return Err(CompileError::UnknownVariable(v.to_string()));
            }
            if !var_stable(&rec.asmrec, ctx.policy, v) {
                return Err(CompileError::UnstableRead(v.to_string()));
            }
            if let Some(r) = reg_alloc_cached(&rec.regrec, in_use, v) {
                (r, rec.clone())
            } else {
                let r = reg_alloc(&rec.regrec, in_use, ctx.registers).ok_or_else(exhausted)?;
                emit(&mut code, &mut label, Instr::Load(r, v.clone()), rec);
                let mut next = rec.clone();
                next.regrec.insert(r, e.clone());
                (r, next)
            }
        }
        Expr::BinOp(op, a, b) => {
            let left = compile_expr(ctx, rec, in_use, label.take(), a)?;
            let mut in_use2 = in_use.clone();
            in_use2.insert(left.reg);
            let right = compile_expr(ctx, &left.rec, &in_use2, left.label, b)?;
            code.extend(left.code);
            code.extend(right.code);
            label = right.label;
            emit(&mut code, &mut label, Instr::Op(*op, left.reg, right.reg), &right.rec);
            let mut next = right.rec;
            next.regrec.insert(left.reg, e.clone());
            (left.reg, next)
        }
    };
    Ok(ExprOutput {
        code,
        reg,
        rec: out_rec,
        label,
    })
}

fn emit(code: &mut Vec<AnnotatedInstr>, label: &mut Option<Label>, instr: Instr, rec: &CompRec) {
    code.push(AnnotatedInstr {
        label: label.take(),
        instr,
        rec: rec.clone(),
        epilogue: false,
    });
}

use super::records::{var_stable, AsmRec};
use super::CompileError;
use crate::lang::{Cmd, Expr};
use crate::model::{Lock, LockGovernance, Policy};

/// Threads the assumption record through `c`, simulating lock effects, and
/// checks that
///
/// * expressions read only stable variables,
/// * lock-governed variables are only written while stable,
/// * both branches of a conditional end with the same record, and
/// * loop bodies restore the record they started with.
///
/// Returns the record in force after `c`.
pub fn stability_checks(c: &Cmd, s: &AsmRec, policy: &Policy) -> Result<AsmRec, CompileError> {
    match c {
        Cmd::Skip => Ok(s.clone()),
        Cmd::Stop => Err(CompileError::Precondition("`stop` in source program".into())),
        Cmd::Assign(v, e) => {
            check_reads(e, s, policy)?;
            if !policy.is_declared(v) {
                return Err(CompileError::UnknownVariable(v.to_string()));
            }
            if policy.interp().is_governed(v) && !var_stable(s, policy, v) {
                return Err(CompileError::UnprotectedWrite(v.to_string()));
            }
            Ok(s.clone())
        }
        Cmd::Seq(a, b) => {
            let mid = stability_checks(a, s, policy)?;
            stability_checks(b, &mid, policy)
        }
        Cmd::If(e, a, b) => {
            check_reads(e, s, policy)?;
            let sa = stability_checks(a, s, policy)?;
            let sb = stability_checks(b, s, policy)?;
            if sa != sb {
                return Err(CompileError::BranchLockMismatch);
            }
            Ok(sa)
        }
        Cmd::While(e, body) => {
            check_reads(e, s, policy)?;
            if stability_checks(body, s, policy)? != *s {
                return Err(CompileError::LoopLockMismatch);
            }
            Ok(s.clone())
        }
        Cmd::LockAcq(k) => Ok(s.acquire(governance(policy, k)?)),
        Cmd::LockRel(k) => Ok(s.release(governance(policy, k)?)),
    }
}

pub(super) fn governance<'a>(policy: &'a Policy, k: &Lock) -> Result<&'a LockGovernance, CompileError> {
    policy
        .interp()
        .get(k)
        .ok_or_else(|| CompileError::UnknownLock(k.to_string()))
}

fn check_reads(e: &Expr, s: &AsmRec, policy: &Policy) -> Result<(), CompileError> {
    for v in e.vars() {
        if !policy.is_declared(&v) {
            return Err(CompileError::UnknownVariable(v.to_string()));
        }
        if !var_stable(s, policy, &v) {
            return Err(CompileError::UnstableRead(v.to_string()));
        }
    }
    Ok(())
}

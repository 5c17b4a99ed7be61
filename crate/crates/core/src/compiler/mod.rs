//! Single-pass compiler from While to RISC.
//!
//! Each emitted instruction is annotated with the compilation record in force
//! before it executes. The record caches register contents (load
//! elimination) and tracks which variables are protected by held locks.

mod annotated;
mod cmd;
mod expr;
mod joinable;
mod records;
mod regalloc;
mod stability;

use thiserror::Error;

pub use annotated::{AnnotatedJson, AnnotatedJsonError};
pub use cmd::{compile, compile_cmd, finalize, AnnotatedInstr, CompileOutput, Compiled};
pub use expr::{compile_expr, ExprOutput};
pub use joinable::{joinable, joinable_bwd, joinable_fwd};
pub use records::{
    asmrec_mds_consistent, compiled_config_consistent, regrec_mem_consistent, regrec_mem_inconsistency, regrec_stable,
    var_stable, AsmRec, CompRec, RegRec,
};
pub use regalloc::{reg_alloc, reg_alloc_cached};
pub use stability::stability_checks;

use crate::model::Policy;

/// Why a compilation was rejected. Stability failures name the offending
/// variable.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("stability check failed: read of unstable variable `{0}`")]
    UnstableRead(String),
    #[error("stability check failed: write to lock-governed variable `{0}` without holding its lock")]
    UnprotectedWrite(String),
    #[error("stability check failed: branches of `if` end with different locks held")]
    BranchLockMismatch,
    #[error("stability check failed: loop body does not restore the locks held on entry")]
    LoopLockMismatch,
    #[error("unknown lock `{0}`")]
    UnknownLock(String),
    #[error("undeclared variable `{0}`")]
    UnknownVariable(String),
    #[error("expression depth exceeds the limit of {0} registers")]
    RegisterExhaustion(usize),
    #[error("compiler precondition violated: {0}")]
    Precondition(String),
}

impl CompileError {
    pub fn is_stability(&self) -> bool {
        matches!(
            self,
            CompileError::UnstableRead(_)
                | CompileError::UnprotectedWrite(_)
                | CompileError::BranchLockMismatch
                | CompileError::LoopLockMismatch
        )
    }
}

/// Fixed inputs of a compilation.
#[derive(Clone, Copy, Debug)]
pub struct CompileCtx<'a> {
    pub policy: &'a Policy,
    pub registers: usize,
}

impl<'a> CompileCtx<'a> {
    pub fn new(policy: &'a Policy, registers: usize) -> Self {
        Self { policy, registers }
    }
}

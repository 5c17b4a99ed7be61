//! The While source language: syntax, parser, pretty-printer and the
//! deterministic small-step semantics, including the lock rules shared with
//! the RISC machine.

mod ast;
mod locks;
mod parser;
mod pretty;
mod semantics;

pub use ast::{BinOp, Cmd, Expr};
pub use locks::{
    init_mds, lock_acq_upd, lock_acquire, lock_held_mds_correct, lock_not_held_mds_correct, lock_rel_upd, lock_release,
    LockEffect,
};
pub use parser::{parse_cmd, parse_expr, ParseError};
pub use semantics::{leftmost_cmd, step_while, Footprint, StepError, StepInfo, WhileConf};

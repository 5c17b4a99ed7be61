//! How many source steps a single compiled instruction stands for.

use crate::lang::{leftmost_cmd, Cmd};
use crate::risc::{Instr, RiscState};

/// Number of While steps matched by the next RISC step of `risc` when the
/// source side is at `cmd`.
///
/// Register-only instructions are silent except at a loop head, where the
/// first one also accounts for the source's unfolding step. Jumps and primed
/// no-ops are compiler epilogue and match nothing. Everything else matches
/// one source step.
pub fn abs_steps(cmd: &Cmd, risc: &RiscState) -> usize {
    let Some(ins) = risc.prog.instr(risc.pc) else {
        return 0;
    };
    match ins {
        Instr::Load(..) | Instr::Op(..) | Instr::MoveK(..) | Instr::MoveR(..) => {
            usize::from(matches!(leftmost_cmd(cmd), Cmd::While(..)))
        }
        _ if risc.prog.is_epilogue(risc.pc) => 0,
        _ => 1,
    }
}

//! Target language: instruction set, programs with resolved labels, and the
//! deterministic virtual machine.

mod isa;
mod machine;
mod program;

pub use isa::{Instr, Label, Reg};
pub use machine::{RiscConf, RiscError, RiscState, DEFAULT_REGISTERS};
pub use program::{ProgramError, RiscProgram};

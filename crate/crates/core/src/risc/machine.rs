use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use super::isa::{Instr, Reg};
use super::program::{ProgramError, RiscProgram};
use crate::lang::{lock_acquire, lock_release, Footprint, StepError, StepInfo};
use crate::model::{LockInterp, Mem, ModeState, Value};

pub const DEFAULT_REGISTERS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RiscError {
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error("register r{0} out of range")]
    BadRegister(Reg),
}

/// Thread-private RISC state: program counter, shared program text and
/// register file.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RiscState {
    pub pc: usize,
    pub prog: Arc<RiscProgram>,
    pub regs: Vec<Value>,
}

impl RiscState {
    pub fn new(prog: Arc<RiscProgram>, registers: usize) -> Self {
        Self {
            pc: 0,
            prog,
            regs: vec![0; registers],
        }
    }

    pub fn stopped(&self) -> bool {
        self.pc >= self.prog.len()
    }

    pub fn reg(&self, r: Reg) -> Result<Value, RiscError> {
        self.regs.get(r as usize).copied().ok_or(RiscError::BadRegister(r))
    }

    fn set_reg(&mut self, r: Reg, v: Value) -> Result<(), RiscError> {
        let slot = self.regs.get_mut(r as usize).ok_or(RiscError::BadRegister(r))?;
        *slot = v;
        Ok(())
    }

    /// Executes the instruction at `pc`. The program text is never changed.
    pub fn step(&mut self, mds: &mut ModeState, mem: &mut Mem, interp: &LockInterp) -> Result<StepInfo, RiscError> {
        let ins = self.prog.instr(self.pc).ok_or(StepError::SteppedStop)?.clone();
        let mut info = StepInfo::default();
        let mut next_pc = self.pc + 1;
        match &ins {
            Instr::Load(r, v) => {
                self.set_reg(*r, mem.var(v))?;
                info.footprint.reads.insert(v.clone());
            }
            Instr::Store(v, r) => {
                mem.set_var(v, self.reg(*r)?);
                info.footprint = Footprint {
                    reads: BTreeSet::new(),
                    writes: BTreeSet::from([v.clone()]),
                };
            }
            Instr::Jmp(l) => next_pc = self.prog.resolve(*l)?,
            Instr::Jz(l, r) => {
                if self.reg(*r)? == 0 {
                    next_pc = self.prog.resolve(*l)?;
                }
            }
            Instr::Nop => {}
            Instr::MoveK(r, k) => self.set_reg(*r, *k)?,
            Instr::MoveR(a, b) => {
                let v = self.reg(*b)?;
                self.set_reg(*a, v)?;
            }
            Instr::Op(op, a, b) => {
                let v = op.apply(self.reg(*a)?, self.reg(*b)?);
                self.set_reg(*a, v)?;
            }
            Instr::LockAcq(k) | Instr::LockRel(k) => {
                let eff = if matches!(ins, Instr::LockAcq(_)) {
                    lock_acquire(k, mds, mem, interp)?
                } else {
                    lock_release(k, mds, mem, interp)?
                };
                if !eff.progressed() {
                    next_pc = self.pc;
                }
                info.lock = Some((k.clone(), eff));
            }
        }
        self.pc = next_pc;
        Ok(info)
    }
}

/// A thread-local RISC configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RiscConf {
    pub state: RiscState,
    pub mds: ModeState,
    pub mem: Mem,
}

impl RiscConf {
    pub fn new(prog: Arc<RiscProgram>, registers: usize, mds: ModeState, mem: Mem) -> Self {
        Self {
            state: RiscState::new(prog, registers),
            mds,
            mem,
        }
    }

    pub fn stopped(&self) -> bool {
        self.state.stopped()
    }

    pub fn step(&self, interp: &LockInterp) -> Result<(RiscConf, StepInfo), RiscError> {
        let mut next = self.clone();
        let info = next.state.step(&mut next.mds, &mut next.mem, interp)?;
        Ok((next, info))
    }
}

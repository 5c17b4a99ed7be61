//! Concurrent systems: threads sharing one memory, stepped by a schedule.

use std::fmt;

use crate::lang::{init_mds, leftmost_cmd, step_while, Cmd, StepInfo};
use crate::model::{LockInterp, Mem, ModeState};
use crate::risc::RiscState;

use super::HarnessError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ThreadState {
    While(Cmd),
    Risc(RiscState),
}

impl ThreadState {
    pub fn stopped(&self) -> bool {
        match self {
            ThreadState::While(c) => c.is_stop(),
            ThreadState::Risc(r) => r.stopped(),
        }
    }

    pub fn step(&mut self, mds: &mut ModeState, mem: &mut Mem, interp: &LockInterp) -> Result<StepInfo, HarnessError> {
        match self {
            ThreadState::While(c) => {
                let (next, info) = step_while(c, mds, mem, interp)?;
                *c = next;
                Ok(info)
            }
            ThreadState::Risc(r) => Ok(r.step(mds, mem, interp)?),
        }
    }
}

/// Longest command text shown for a While thread.
const TRACE_WIDTH: usize = 72;

/// Shows the next command of a While thread or the current instruction of a
/// RISC thread.
impl fmt::Display for ThreadState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThreadState::While(c) => {
                let head = format!("{:#}", leftmost_cmd(c));
                match head.char_indices().nth(TRACE_WIDTH) {
                    Some((i, _)) => write!(f, "{}...", &head[..i]),
                    None => f.write_str(&head),
                }
            }
            ThreadState::Risc(r) => match r.prog.instr(r.pc) {
                Some(i) => write!(f, "pc={} {i}", r.pc),
                None => write!(f, "pc={} (stopped)", r.pc),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Thread {
    pub state: ThreadState,
    pub mds: ModeState,
}

/// A global configuration: the thread pool and the shared memory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalConf {
    pub threads: Vec<Thread>,
    pub mem: Mem,
}

impl GlobalConf {
    /// Every thread starts from the initial mode state of `interp`.
    pub fn new(states: Vec<ThreadState>, mem: Mem, interp: &LockInterp) -> Self {
        let mds = init_mds(interp);
        Self {
            threads: states
                .into_iter()
                .map(|state| Thread {
                    state,
                    mds: mds.clone(),
                })
                .collect(),
            mem,
        }
    }

    pub fn len(&self) -> usize {
        self.threads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.threads.is_empty()
    }

    pub fn all_stopped(&self) -> bool {
        self.threads.iter().all(|t| t.state.stopped())
    }

    pub fn mds(&self) -> impl Iterator<Item = &ModeState> {
        self.threads.iter().map(|t| &t.mds)
    }

    /// Steps thread `i`. Scheduling a stopped thread stutters and returns
    /// `None`.
    pub fn step(&mut self, i: usize, interp: &LockInterp) -> Result<Option<StepInfo>, HarnessError> {
        let n = self.threads.len();
        let t = self
            .threads
            .get_mut(i)
            .ok_or(HarnessError::BadThread { index: i, threads: n })?;
        if t.state.stopped() {
            return Ok(None);
        }
        t.state.step(&mut t.mds, &mut self.mem, interp).map(Some)
    }

    pub fn run_schedule(&self, schedule: &[usize], interp: &LockInterp) -> Result<GlobalConf, HarnessError> {
        let mut g = self.clone();
        for &i in schedule {
            g.step(i, interp)?;
        }
        Ok(g)
    }
}

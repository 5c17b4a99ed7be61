use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use super::ast::Cmd;
use super::locks::{lock_acquire, lock_release, LockEffect};
use crate::model::{Lock, LockInterp, Mem, ModeState, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error("cannot step a stopped configuration")]
    SteppedStop,
    #[error("unknown lock `{0}`")]
    UnknownLock(String),
}

/// Program variables read and written by one step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Footprint {
    pub reads: BTreeSet<Var>,
    pub writes: BTreeSet<Var>,
}

/// What one step did besides its footprint.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StepInfo {
    pub footprint: Footprint,
    pub lock: Option<(Lock, LockEffect)>,
}

/// A thread-local While configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WhileConf {
    pub cmd: Cmd,
    pub mds: ModeState,
    pub mem: Mem,
}

impl WhileConf {
    pub fn new(cmd: Cmd, mds: ModeState, mem: Mem) -> Self {
        Self { cmd, mds, mem }
    }

    pub fn stopped(&self) -> bool {
        self.cmd.is_stop()
    }

    pub fn step(&self, interp: &LockInterp) -> Result<(WhileConf, StepInfo), StepError> {
        let mut next = self.clone();
        let (cmd, info) = step_while(&self.cmd, &mut next.mds, &mut next.mem, interp)?;
        next.cmd = cmd;
        Ok((next, info))
    }
}

/// One small step of `cmd`, updating the mode state and memory in place and
/// returning the successor command.
pub fn step_while(
    cmd: &Cmd,
    mds: &mut ModeState,
    mem: &mut Mem,
    interp: &LockInterp,
) -> Result<(Cmd, StepInfo), StepError> {
    match cmd {
        Cmd::Stop => Err(StepError::SteppedStop),
        Cmd::Skip => Ok((Cmd::Stop, StepInfo::default())),
        Cmd::Assign(v, e) => {
            mem.set_var(v, e.eval(mem));
            let info = StepInfo {
                footprint: Footprint {
                    reads: e.vars(),
                    writes: BTreeSet::from([v.clone()]),
                },
                lock: None,
            };
            Ok((Cmd::Stop, info))
        }
        Cmd::Seq(a, b) => {
            if a.is_stop() {
                return Ok(((**b).clone(), StepInfo::default()));
            }
            let (a2, info) = step_while(a, mds, mem, interp)?;
            let next = if a2.is_stop() {
                (**b).clone()
            } else {
                Cmd::Seq(Arc::new(a2), b.clone())
            };
            Ok((next, info))
        }
        Cmd::If(e, a, b) => {
            let branch = if e.eval(mem) != 0 { a } else { b };
            let info = StepInfo {
                footprint: Footprint {
                    reads: e.vars(),
                    writes: BTreeSet::new(),
                },
                lock: None,
            };
            Ok(((**branch).clone(), info))
        }
        Cmd::While(e, body) => {
            let unrolled = Cmd::If(
                e.clone(),
                Arc::new(Cmd::Seq(body.clone(), Arc::new(cmd.clone()))),
                Arc::new(Cmd::Stop),
            );
            Ok((unrolled, StepInfo::default()))
        }
        Cmd::LockAcq(k) => {
            let eff = lock_acquire(k, mds, mem, interp)?;
            let next = if eff.progressed() { Cmd::Stop } else { cmd.clone() };
            Ok((
                next,
                StepInfo {
                    footprint: Footprint::default(),
                    lock: Some((k.clone(), eff)),
                },
            ))
        }
        Cmd::LockRel(k) => {
            let eff = lock_release(k, mds, mem, interp)?;
            let next = if eff.progressed() { Cmd::Stop } else { cmd.clone() };
            Ok((
                next,
                StepInfo {
                    footprint: Footprint::default(),
                    lock: Some((k.clone(), eff)),
                },
            ))
        }
    }
}

/// The command that will execute next: the head of a sequence, otherwise the
/// command itself.
pub fn leftmost_cmd(c: &Cmd) -> &Cmd {
    match c {
        Cmd::Seq(a, _) => leftmost_cmd(a),
        other => other,
    }
}

//! Lock primitives and their effect on the mode state. Both languages share
//! these rules.

use crate::model::{ev_lock, Lock};
use crate::model::{LockGovernance, LockInterp, Mem, Mode, ModeState, LOCK_FALSE, LOCK_TRUE};

use super::semantics::StepError;

/// Outcome of executing one lock primitive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LockEffect {
    Acquired,
    /// The lock was held; the step stutters.
    Spun,
    Released,
    /// Release attempted with a mode state inconsistent with holding the
    /// lock; the step stutters.
    Invalid,
}

impl LockEffect {
    pub fn progressed(self) -> bool {
        matches!(self, LockEffect::Acquired | LockEffect::Released)
    }
}

fn governance<'a>(interp: &'a LockInterp, k: &Lock) -> Result<&'a LockGovernance, StepError> {
    interp.get(k).ok_or_else(|| StepError::UnknownLock(k.to_string()))
}

/// Acquiring gains assumptions and drops guarantees.
pub fn lock_acq_upd(mds: &ModeState, k: &Lock, interp: &LockInterp) -> Result<ModeState, StepError> {
    let g = governance(interp, k)?;
    let mut out = mds.clone();
    for v in &g.no_w {
        out.get_mut(Mode::GuarNoW).remove(v);
        out.get_mut(Mode::AsmNoW).insert(v.clone());
    }
    for v in &g.no_rw {
        out.get_mut(Mode::GuarNoRW).remove(v);
        out.get_mut(Mode::AsmNoRW).insert(v.clone());
    }
    Ok(out)
}

/// Releasing drops assumptions and restores guarantees.
pub fn lock_rel_upd(mds: &ModeState, k: &Lock, interp: &LockInterp) -> Result<ModeState, StepError> {
    let g = governance(interp, k)?;
    let mut out = mds.clone();
    for v in &g.no_w {
        out.get_mut(Mode::GuarNoW).insert(v.clone());
        out.get_mut(Mode::AsmNoW).remove(v);
    }
    for v in &g.no_rw {
        out.get_mut(Mode::GuarNoRW).insert(v.clone());
        out.get_mut(Mode::AsmNoRW).remove(v);
    }
    Ok(out)
}

/// All of the lock's assumptions and none of its guarantees.
pub fn lock_held_mds_correct(mds: &ModeState, g: &LockGovernance) -> bool {
    g.no_w
        .iter()
        .all(|x| !mds.contains(Mode::GuarNoW, x) && mds.contains(Mode::AsmNoW, x))
        && g.no_rw
            .iter()
            .all(|x| !mds.contains(Mode::GuarNoRW, x) && mds.contains(Mode::AsmNoRW, x))
}

/// All of the lock's guarantees and none of its assumptions. Not the
/// negation of [`lock_held_mds_correct`].
pub fn lock_not_held_mds_correct(mds: &ModeState, g: &LockGovernance) -> bool {
    g.no_w
        .iter()
        .all(|x| mds.contains(Mode::GuarNoW, x) && !mds.contains(Mode::AsmNoW, x))
        && g.no_rw
            .iter()
            .all(|x| mds.contains(Mode::GuarNoRW, x) && !mds.contains(Mode::AsmNoRW, x))
}

/// Initial mode state: every lock's guarantees, no assumptions.
pub fn init_mds(interp: &LockInterp) -> ModeState {
    let mut mds = ModeState::new();
    mds.get_mut(Mode::GuarNoW).extend(interp.all_no_w());
    mds.get_mut(Mode::GuarNoRW).extend(interp.all_no_rw());
    mds
}

pub fn lock_acquire(
    k: &Lock,
    mds: &mut ModeState,
    mem: &mut Mem,
    interp: &LockInterp,
) -> Result<LockEffect, StepError> {
    let upd = lock_acq_upd(mds, k, interp)?;
    if ev_lock(mem.lock(k)) {
        return Ok(LockEffect::Spun);
    }
    mem.set_lock(k, LOCK_TRUE);
    *mds = upd;
    Ok(LockEffect::Acquired)
}

pub fn lock_release(
    k: &Lock,
    mds: &mut ModeState,
    mem: &mut Mem,
    interp: &LockInterp,
) -> Result<LockEffect, StepError> {
    let g = governance(interp, k)?;
    if !lock_held_mds_correct(mds, g) {
        return Ok(LockEffect::Invalid);
    }
    *mds = lock_rel_upd(mds, k, interp)?;
    mem.set_lock(k, LOCK_FALSE);
    Ok(LockEffect::Released)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Var;

    fn worker() -> LockInterp {
        LockInterp::new()
            .with_lock("source_lock", &["source", "domain"], &[])
            .with_lock("workspace_lock", &[], &["workspace"])
    }

    #[test]
    fn init_mds_examples() {
        assert_eq!(init_mds(&LockInterp::new()), ModeState::new());
        let mds = init_mds(&worker());
        assert_eq!(
            mds,
            ModeState::new()
                .with(Mode::GuarNoW, &["source", "domain"])
                .with(Mode::GuarNoRW, &["workspace"])
        );
    }

    #[test]
    fn acquire_then_release_is_identity_on_init() {
        let interp = worker();
        let init = init_mds(&interp);
        for k in ["source_lock", "workspace_lock"] {
            let k = Lock::new(k);
            let acq = lock_acq_upd(&init, &k, &interp).unwrap();
            assert!(lock_held_mds_correct(&acq, interp.get(&k).unwrap()));
            assert!(!lock_not_held_mds_correct(&acq, interp.get(&k).unwrap()));
            assert_eq!(lock_rel_upd(&acq, &k, &interp).unwrap(), init);
        }
    }

    #[test]
    fn acquire_adds_no_write_assumptions() {
        let interp = worker();
        let k = Lock::new("source_lock");
        let mds = lock_acq_upd(&init_mds(&interp), &k, &interp).unwrap();
        assert!(mds.contains(Mode::AsmNoW, &Var::new("source")));
        assert!(mds.contains(Mode::AsmNoW, &Var::new("domain")));
    }

    #[test]
    fn init_is_consistent_with_not_holding() {
        let interp = worker();
        let init = init_mds(&interp);
        for (_, g) in interp.locks() {
            assert!(lock_not_held_mds_correct(&init, g));
            assert!(!lock_held_mds_correct(&init, g));
        }
    }

    #[test]
    fn mixed_state_is_neither() {
        let interp = worker();
        let g = interp.get(&Lock::new("source_lock")).unwrap();
        let mds = ModeState::new().with(Mode::AsmNoW, &["source"]);
        assert!(!lock_held_mds_correct(&mds, g));
        assert!(!lock_not_held_mds_correct(&mds, g));
    }

    #[test]
    fn acquire_spins_on_held_lock() {
        let interp = worker();
        let k = Lock::new("source_lock");
        let mut mds = init_mds(&interp);
        let mut mem = Mem::new().with_lock("source_lock", 1);
        let before = (mds.clone(), mem.clone());
        assert_eq!(lock_acquire(&k, &mut mds, &mut mem, &interp).unwrap(), LockEffect::Spun);
        assert_eq!((mds, mem), before);
    }

    #[test]
    fn release_without_acquire_is_invalid() {
        let interp = worker();
        let k = Lock::new("workspace_lock");
        let mut mds = init_mds(&interp);
        let mut mem = Mem::new();
        assert_eq!(
            lock_release(&k, &mut mds, &mut mem, &interp).unwrap(),
            LockEffect::Invalid
        );
        assert_eq!(mds, init_mds(&interp));
    }

    #[test]
    fn unknown_lock_is_an_error() {
        let interp = worker();
        let mut mds = ModeState::new();
        let mut mem = Mem::new();
        assert!(matches!(
            lock_acquire(&Lock::new("nope"), &mut mds, &mut mem, &interp),
            Err(StepError::UnknownLock(_))
        ));
    }
}

//! Global compatibility of mode states across a running system.

use super::enumerate::{explore, Finding, ScheduleSpec};
use super::report::{CheckReport, Counterexample};
use super::system::GlobalConf;
use super::HarnessError;
use crate::lang::{lock_held_mds_correct, lock_not_held_mds_correct};
use crate::model::{ev_lock, Mode, Policy, Var};

pub const CHECK: &str = "global-compatibility";

/// The first broken compatibility requirement of `g`, if any.
pub fn compat_violation(policy: &Policy, g: &GlobalConf) -> Option<Finding> {
    let interp = policy.interp();
    for (k, gov) in interp.locks() {
        let held: Vec<usize> = (0..g.len())
            .filter(|&i| lock_held_mds_correct(&g.threads[i].mds, gov))
            .collect();
        let not_held = |i: usize| lock_not_held_mds_correct(&g.threads[i].mds, gov);
        if ev_lock(g.mem.lock(k)) {
            let ok = held.len() == 1 && (0..g.len()).all(|j| j == held[0] || not_held(j));
            if !ok {
                return Some(Finding::new(
                    "lock-managed modes",
                    format!("{k} is held but threads {held:?} have holder modes"),
                ));
            }
        } else if let Some(i) = (0..g.len()).find(|&i| !not_held(i)) {
            return Some(
                Finding::new(
                    "lock-managed modes",
                    format!("{k} is free but thread {i} has holder modes"),
                )
                .in_thread(i),
            );
        }
    }

    let all_no_rw = interp.all_no_rw();
    let all_no_w = interp.all_no_w();
    for (i, t) in g.threads.iter().enumerate() {
        let unmanaged = [
            (Mode::AsmNoRW, Mode::GuarNoRW, &all_no_rw),
            (Mode::AsmNoW, Mode::GuarNoW, &all_no_w),
        ];
        for (asm, guar, managed) in unmanaged {
            for x in t.mds.get(asm).iter().filter(|x| !managed.contains(*x)) {
                if let Some(j) = (0..g.len()).find(|&j| j != i && !g.threads[j].mds.contains(guar, x)) {
                    return Some(
                        Finding::new(
                            "unmanaged modes",
                            format!("thread {i} assumes {asm} {x}, thread {j} lacks {guar}"),
                        )
                        .in_thread(i),
                    );
                }
            }
        }
        let lock_named = t
            .mds
            .mentioned()
            .into_iter()
            .find(|x: &Var| interp.lock_names().any(|k| k.as_str() == x.as_str()) && !policy.is_declared(x));
        if let Some(x) = lock_named {
            return Some(Finding::new("no lock in modes", format!("modes mention lock {x}")).in_thread(i));
        }
        for (asm, guar) in [(Mode::AsmNoRW, Mode::GuarNoRW), (Mode::AsmNoW, Mode::GuarNoW)] {
            for x in t.mds.get(asm) {
                if let Some(j) = (0..g.len()).find(|&j| j != i && !g.threads[j].mds.contains(guar, x)) {
                    return Some(
                        Finding::new(
                            "compatible modes",
                            format!("thread {i} assumes {asm} {x}, thread {j} lacks {guar}"),
                        )
                        .in_thread(i),
                    );
                }
            }
        }
    }
    None
}

pub fn check_global_compat(
    policy: &Policy,
    root: &GlobalConf,
    schedules: &ScheduleSpec,
) -> Result<CheckReport, HarnessError> {
    let interp = policy.interp();
    let ex = explore(
        root,
        root.len(),
        schedules,
        |g, i| Ok(g.step(i, interp)?.is_some()),
        |g| compat_violation(policy, g),
    )?;
    let mut rep = match ex.finding {
        None => CheckReport::ok(CHECK),
        Some((schedule, f)) => {
            let mut c = Counterexample::new(f.predicate, f.detail);
            c.step = Some(schedule.len());
            c.schedule = Some(schedule);
            c.thread = f.thread;
            c.init_mems = vec![root.mem.clone()];
            CheckReport::violated(CHECK, c)
        }
    };
    rep.count("states", ex.states);
    Ok(rep.bound("schedules", schedules))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::system::ThreadState;
    use crate::lang::{init_mds, lock_acq_upd, parse_cmd};
    use crate::model::{Lock, LockInterp, Mem};

    fn policy() -> Policy {
        Policy::from_spec(
            &[("x", "low"), ("y", "low")],
            LockInterp::new().with_lock("k", &["x"], &["y"]),
        )
        .unwrap()
    }

    #[test]
    fn two_holders_flagged() {
        let p = policy();
        let held = lock_acq_upd(&init_mds(p.interp()), &Lock::new("k"), p.interp()).unwrap();
        let mut g = GlobalConf::new(
            vec![ThreadState::While(parse_cmd("skip").unwrap()); 2],
            Mem::new().with_lock("k", 1),
            p.interp(),
        );
        for t in &mut g.threads {
            t.mds = held.clone();
        }
        let f = compat_violation(&p, &g).unwrap();
        assert_eq!(f.predicate, "lock-managed modes");
    }

    #[test]
    fn locking_threads_stay_compatible() {
        let p = policy();
        let a = parse_cmd("acquire(k); x := y + 1; release(k); acquire(k); y := x; release(k)").unwrap();
        let b = parse_cmd("acquire(k); y := 2; release(k)").unwrap();
        let g = GlobalConf::new(
            vec![ThreadState::While(a), ThreadState::While(b)],
            Mem::new(),
            p.interp(),
        );
        let r = check_global_compat(&p, &g, &ScheduleSpec::Exhaustive { max_len: 10 }).unwrap();
        assert!(r.is_ok(), "{}", r.summary());
        assert!(r.explored["states"] > 100);
    }

    #[test]
    fn free_lock_with_holder_modes() {
        let p = policy();
        let held = lock_acq_upd(&init_mds(p.interp()), &Lock::new("k"), p.interp()).unwrap();
        let mut g = GlobalConf::new(
            vec![ThreadState::While(parse_cmd("skip").unwrap())],
            Mem::new(),
            p.interp(),
        );
        g.threads[0].mds = held;
        assert_eq!(compat_violation(&p, &g).unwrap().thread, Some(0));
    }
}

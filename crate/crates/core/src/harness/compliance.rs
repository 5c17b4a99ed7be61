//! Local mode compliance: a thread never touches what its current guarantees
//! promise to leave alone, under arbitrary interference on variables it
//! does not assume stable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::havoc::havoc_identical;
use super::report::{CheckReport, Counterexample};
use super::system::ThreadState;
use super::HarnessError;
use crate::lang::{LockEffect, StepInfo};
use crate::model::{Mem, Mode, ModeState, Policy, Var};

pub const CHECK: &str = "local-compliance";

#[derive(Clone, Copy, Debug)]
pub struct ComplianceBounds {
    pub runs: usize,
    pub max_steps: usize,
    /// Probability of an environment write instead of an own step.
    pub havoc_rate: f64,
    pub seed: u64,
}

/// The guarantee-violating access of one step, if any. An access to `x`
/// also counts against every variable whose classification `x` controls.
pub fn footprint_violation(policy: &Policy, mds: &ModeState, info: &StepInfo) -> Option<String> {
    let guarded = |m: Mode, x: &Var| mds.contains(m, x) || policy.dependents(x).any(|d| mds.contains(m, d));
    for x in &info.footprint.writes {
        if guarded(Mode::GuarNoW, x) || guarded(Mode::GuarNoRW, x) {
            return Some(format!("write to {x} under {mds}"));
        }
    }
    for x in &info.footprint.reads {
        if guarded(Mode::GuarNoRW, x) {
            return Some(format!("read of {x} under {mds}"));
        }
    }
    None
}

pub fn check_local_compliance(
    thread: &ThreadState,
    policy: &Policy,
    mds0: &ModeState,
    init_mems: &[Mem],
    bounds: &ComplianceBounds,
) -> Result<CheckReport, HarnessError> {
    let parts: Vec<CheckReport> = (0..bounds.runs)
        .into_par_iter()
        .map(|run| {
            let mem = init_mems.get(run % init_mems.len().max(1)).cloned().unwrap_or_default();
            run_one(thread, policy, mds0, mem, bounds, run as u64)
        })
        .collect::<Result<_, _>>()?;
    Ok(CheckReport::merge(CHECK, parts)
        .bound("runs", bounds.runs)
        .bound("max_steps", bounds.max_steps)
        .bound("havoc_rate", bounds.havoc_rate)
        .bound("seed", bounds.seed))
}

fn run_one(
    thread: &ThreadState,
    policy: &Policy,
    mds0: &ModeState,
    mem0: Mem,
    bounds: &ComplianceBounds,
    run: u64,
) -> Result<CheckReport, HarnessError> {
    let interp = policy.interp();
    let mut rng = ChaCha8Rng::seed_from_u64(bounds.seed.wrapping_add(run));
    let mut t = thread.clone();
    let mut mds = mds0.clone();
    let mut mem = mem0.clone();
    let mut rep = CheckReport::ok(CHECK);
    let mut own = 0u64;
    let mut schedule = Vec::new();
    for step in 0..bounds.max_steps {
        if t.stopped() {
            break;
        }
        if rng.random_bool(bounds.havoc_rate) {
            let d = havoc_identical(&mut rng, policy, &mds, &mut [&mut mem]);
            schedule.push(format!("env: {}", d.unwrap_or_else(|| "nothing writable".into())));
            continue;
        }
        let before = mds.clone();
        let info = t.step(&mut mds, &mut mem, interp)?;
        own += 1;
        schedule.push(format!("own: {t}"));
        if let Some((k, LockEffect::Invalid)) = &info.lock {
            let d = format!("release({k}) stuttered: modes do not match holding the lock");
            if !rep.diagnostics.contains(&d) {
                rep.diagnostics.push(d);
            }
        }
        if let Some(d) = footprint_violation(policy, &before, &info) {
            let mut c = Counterexample::new("guarantee respected", d);
            c.init_mems = vec![mem0];
            c.step = Some(step);
            c.perturbations = schedule;
            let mut v = CheckReport::violated(CHECK, c);
            v.diagnostics = rep.diagnostics;
            return Ok(v);
        }
    }
    rep.count("runs", 1);
    rep.count("own_steps", own);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::lang::{init_mds, parse_cmd, Footprint};
    use crate::model::LockInterp;

    fn policy() -> Policy {
        Policy::from_spec(
            &[("x", "low"), ("y", "low"), ("c", "low"), ("d", "dep:c=0")],
            LockInterp::new()
                .with_lock("k", &["x"], &[])
                .with_lock("m", &[], &["d", "c"]),
        )
        .unwrap()
    }

    fn bounds() -> ComplianceBounds {
        ComplianceBounds {
            runs: 20,
            max_steps: 200,
            havoc_rate: 0.3,
            seed: 1,
        }
    }

    fn run(src: &str) -> CheckReport {
        let p = policy();
        let t = ThreadState::While(parse_cmd(src).unwrap());
        check_local_compliance(&t, &p, &init_mds(p.interp()), &[Mem::new()], &bounds()).unwrap()
    }

    #[test]
    fn locked_write_ok() {
        assert!(run("acquire(k); x := y; release(k)").is_ok());
    }

    #[test]
    fn unlocked_write_flagged() {
        assert!(!run("x := 1").is_ok());
    }

    #[test]
    fn control_var_read_counts_for_dependents() {
        let p = policy();
        let mds = init_mds(p.interp());
        let info = StepInfo {
            footprint: Footprint {
                reads: BTreeSet::from([Var::new("c")]),
                writes: BTreeSet::new(),
            },
            lock: None,
        };
        assert!(footprint_violation(&p, &mds, &info).is_some());
    }

    #[test]
    fn bad_release_is_only_diagnostic() {
        let r = run("release(k)");
        assert!(r.is_ok());
        assert_eq!(r.diagnostics.len(), 1);
    }
}

//! System-level security: two runs of the whole system from equivalent
//! memories, under the same schedule, stay equivalent at every prefix.
//!
//! Both runs follow the same schedule; since the semantics is deterministic
//! this is the only candidate witness for the matching run.

use rayon::prelude::*;

use super::enumerate::{explore, Finding, ScheduleSpec};
use super::report::{CheckReport, Counterexample};
use super::system::{GlobalConf, ThreadState};
use super::HarnessError;
use crate::model::{Addr, Level, Mem, Policy};

pub const CHECK: &str = "system-security";

#[derive(Clone)]
struct Pair {
    a: GlobalConf,
    b: GlobalConf,
}

/// The first observable difference between two system states, if any.
pub fn secure_violation(policy: &Policy, a: &GlobalConf, b: &GlobalConf) -> Option<Finding> {
    if a.len() != b.len() {
        return Some(Finding::new("thread count", format!("{} vs {}", a.len(), b.len())));
    }
    for (i, (ta, tb)) in a.threads.iter().zip(&b.threads).enumerate() {
        if ta.mds != tb.mds {
            return Some(Finding::new("equal modes", format!("{} vs {}", ta.mds, tb.mds)).in_thread(i));
        }
    }
    for x in policy.var_names() {
        let observed = policy.cset().contains(x)
            || (matches!(policy.dma_var(&a.mem, x), Ok(Level::Low)) && a.threads.iter().all(|t| t.mds.readable(x)));
        if observed && a.mem.var(x) != b.mem.var(x) {
            return Some(Finding::new(
                "low equivalence",
                format!("{x} is {} vs {}", a.mem.var(x), b.mem.var(x)),
            ));
        }
    }
    for k in policy.interp().lock_names() {
        if a.mem.lock(k) != b.mem.lock(k) {
            let addr = Addr::Lock(k.clone());
            return Some(Finding::new(
                "low equivalence",
                format!("{addr} is {} vs {}", a.mem.lock(k), b.mem.lock(k)),
            ));
        }
    }
    None
}

pub fn check_system_security(
    policy: &Policy,
    threads: &[ThreadState],
    pairs: &[(Mem, Mem)],
    schedules: &ScheduleSpec,
) -> Result<CheckReport, HarnessError> {
    let interp = policy.interp();
    let parts: Vec<CheckReport> = pairs
        .par_iter()
        .map(|(m1, m2)| {
            let root = Pair {
                a: GlobalConf::new(threads.to_vec(), m1.clone(), interp),
                b: GlobalConf::new(threads.to_vec(), m2.clone(), interp),
            };
            let ex = explore(
                &root,
                threads.len(),
                schedules,
                |p, i| {
                    let sa = p.a.step(i, interp)?.is_some();
                    let sb = p.b.step(i, interp)?.is_some();
                    Ok(sa || sb)
                },
                |p| secure_violation(policy, &p.a, &p.b),
            )?;
            let mut rep = match ex.finding {
                None => CheckReport::ok(CHECK),
                Some((schedule, f)) => {
                    let mut c = Counterexample::new(f.predicate, f.detail);
                    c.step = Some(schedule.len());
                    c.schedule = Some(schedule);
                    c.thread = f.thread;
                    c.init_mems = vec![m1.clone(), m2.clone()];
                    CheckReport::violated(CHECK, c)
                }
            };
            rep.count("pairs", 1);
            rep.count("states", ex.states);
            Ok(rep)
        })
        .collect::<Result<_, HarnessError>>()?;
    Ok(CheckReport::merge(CHECK, parts)
        .bound("pairs", pairs.len())
        .bound("schedules", schedules)
        .note("both runs use the same schedule"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::enumerate::low_eq_pairs;
    use crate::lang::{init_mds, parse_cmd};
    use crate::model::LockInterp;

    fn run(srcs: &[&str], spec: ScheduleSpec) -> CheckReport {
        let p = Policy::from_spec(
            &[("c", "low"), ("d", "dep:c=0"), ("h", "high"), ("l", "low")],
            LockInterp::new().with_lock("k", &["c", "d"], &[]),
        )
        .unwrap();
        let threads: Vec<ThreadState> = srcs.iter().map(|s| ThreadState::While(parse_cmd(s).unwrap())).collect();
        let pairs = low_eq_pairs(&p, &init_mds(p.interp()));
        check_system_security(&p, &threads, &pairs, &spec).unwrap()
    }

    #[test]
    fn guarded_copy_secure() {
        let r = run(
            &[
                "acquire(k); if c == 0 then l := d else h := d fi; release(k)",
                "acquire(k); d := 0; c := 1 - c; release(k)",
            ],
            ScheduleSpec::Exhaustive { max_len: 12 },
        );
        assert!(r.is_ok(), "{}", r.summary());
    }

    #[test]
    fn unguarded_copy_leaks() {
        let r = run(
            &[
                "acquire(k); l := d; release(k)",
                "acquire(k); d := 0; c := 1 - c; release(k)",
            ],
            ScheduleSpec::Exhaustive { max_len: 6 },
        );
        let c = r.counterexample.expect("violation");
        assert_eq!(c.predicate, "low equivalence");
        assert_eq!(c.schedule.as_deref(), Some(&[0, 0][..]));
    }
}

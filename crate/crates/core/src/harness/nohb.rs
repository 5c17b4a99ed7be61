//! No branching on secrets: two source runs from equivalent memories must
//! take every branch the same way.

use rayon::prelude::*;

use super::report::{CheckReport, Counterexample};
use super::HarnessError;
use crate::lang::{leftmost_cmd, step_while, Cmd};
use crate::model::{Mem, ModeState, Policy};

pub const CHECK: &str = "no-high-branching";

pub fn check_no_high_branching(
    cmd: &Cmd,
    policy: &Policy,
    mds: &ModeState,
    pairs: &[(Mem, Mem)],
    max_steps: usize,
) -> Result<CheckReport, HarnessError> {
    let parts: Vec<CheckReport> = pairs
        .par_iter()
        .map(|(a, b)| run_pair(cmd, policy, mds, a, b, max_steps))
        .collect::<Result<_, _>>()?;
    Ok(CheckReport::merge(CHECK, parts)
        .bound("pairs", pairs.len())
        .bound("max_steps", max_steps))
}

fn run_pair(
    cmd: &Cmd,
    policy: &Policy,
    mds0: &ModeState,
    m1: &Mem,
    m2: &Mem,
    max_steps: usize,
) -> Result<CheckReport, HarnessError> {
    let interp = policy.interp();
    let (mut c1, mut d1, mut mem1) = (cmd.clone(), mds0.clone(), m1.clone());
    let (mut c2, mut d2, mut mem2) = (cmd.clone(), mds0.clone(), m2.clone());
    let fail = |step: usize, pred: &str, detail: String| {
        let mut c = Counterexample::new(pred, detail);
        c.init_mems = vec![m1.clone(), m2.clone()];
        c.step = Some(step);
        Ok(CheckReport::violated(CHECK, c))
    };
    let mut steps = 0;
    while !c1.is_stop() && steps < max_steps {
        if c1 != c2 {
            return fail(steps, "same command", format!("`{c1:#}` vs `{c2:#}`"));
        }
        if d1 != d2 {
            return fail(steps, "same modes", format!("{d1} vs {d2}"));
        }
        if let Cmd::If(e, _, _) = leftmost_cmd(&c1) {
            let (g1, g2) = (e.eval(&mem1), e.eval(&mem2));
            if (g1 != 0) != (g2 != 0) {
                return fail(steps, "branch guard", format!("`{e}` is {g1} vs {g2}"));
            }
        }
        c1 = step_while(&c1, &mut d1, &mut mem1, interp)?.0;
        c2 = step_while(&c2, &mut d2, &mut mem2, interp)?.0;
        steps += 1;
    }
    if c1 != c2 {
        return fail(steps, "same command", format!("`{c1:#}` vs `{c2:#}`"));
    }
    let mut rep = CheckReport::ok(CHECK);
    rep.count("pairs", 1);
    rep.count("steps", steps as u64);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::enumerate::low_eq_pairs;
    use crate::lang::{init_mds, parse_cmd};
    use crate::model::LockInterp;

    fn run(src: &str) -> CheckReport {
        let p = Policy::from_spec(&[("h", "high"), ("c", "low"), ("d", "dep:c=0")], LockInterp::new()).unwrap();
        let mds = init_mds(p.interp());
        check_no_high_branching(&parse_cmd(src).unwrap(), &p, &mds, &low_eq_pairs(&p, &mds), 100).unwrap()
    }

    #[test]
    fn high_guard_flagged() {
        let r = run("if h then skip else skip; skip fi");
        assert_eq!(r.counterexample.unwrap().predicate, "branch guard");
    }

    #[test]
    fn control_guard_ok() {
        assert!(run("if c == 0 then skip else d := 1 fi").is_ok());
    }

    #[test]
    fn nonzero_values_agree_as_guards() {
        let p = Policy::from_spec(&[("h", "high")], LockInterp::new()).unwrap();
        let pairs = vec![(Mem::new().with_var("h", 1), Mem::new().with_var("h", 2))];
        let mds = init_mds(p.interp());
        let r =
            check_no_high_branching(&parse_cmd("if h then skip else skip fi").unwrap(), &p, &mds, &pairs, 10).unwrap();
        assert!(r.is_ok());
    }
}

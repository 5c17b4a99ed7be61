//! Lockstep check of two compiled runs from low-equivalent memories.
//!
//! Each compiled run is paired with its source run (the refinement edge);
//! the two compiled runs must follow the same program counters, pace the
//! same, stop together and keep equal modes and memories that agree modulo
//! modes.

use rayon::prelude::*;

use super::havoc::{havoc_low_eq, HavocBudget, HavocConfig};
use super::pacing::abs_steps;
use super::report::{CheckReport, Counterexample};
use super::HarnessError;
use crate::lang::{step_while, Cmd};
use crate::model::{Mem, ModeState, Policy};
use crate::risc::RiscState;

pub const CHECK: &str = "decomposition";

#[derive(Clone)]
struct Side {
    w_cmd: Cmd,
    w_mds: ModeState,
    w_mem: Mem,
    r: RiscState,
    r_mds: ModeState,
    r_mem: Mem,
}

pub struct DecompInput<'a> {
    pub cmd: &'a Cmd,
    pub risc: RiscState,
    pub policy: &'a Policy,
    pub mds: ModeState,
}

pub fn check_decomposed(
    input: &DecompInput<'_>,
    pairs: &[(Mem, Mem)],
    max_steps: usize,
    havoc: Option<&HavocConfig>,
) -> Result<CheckReport, HarnessError> {
    // Plain runs first, then the same pairs under perturbation, so a
    // perturbation can never mask a violation of the unperturbed run.
    let modes: Vec<Option<&HavocConfig>> = std::iter::once(None).chain(havoc.map(Some)).collect();
    let jobs: Vec<(usize, Option<&HavocConfig>)> = modes
        .iter()
        .flat_map(|h| (0..pairs.len()).map(move |i| (i, *h)))
        .collect();
    let parts: Vec<CheckReport> = jobs
        .par_iter()
        .map(|&(i, h)| run_pair(input, &pairs[i].0, &pairs[i].1, max_steps, h, i as u64))
        .collect::<Result<_, _>>()?;
    let mut r = CheckReport::merge(CHECK, parts)
        .bound("pairs", pairs.len())
        .bound("max_steps", max_steps)
        .note("the witness relations are checked only at their derived, observable edges");
    if let Some(h) = havoc {
        r = r.bound("havoc_samples", h.samples).bound("havoc_seed", h.seed);
    }
    Ok(r)
}

fn side(input: &DecompInput<'_>, m: &Mem) -> Side {
    Side {
        w_cmd: input.cmd.clone(),
        w_mds: input.mds.clone(),
        w_mem: m.clone(),
        r: input.risc.clone(),
        r_mds: input.mds.clone(),
        r_mem: m.clone(),
    }
}

fn edge_failure(s: &Side) -> Option<String> {
    if s.w_mem != s.r_mem {
        return Some("compiled and source memories differ".into());
    }
    if s.w_mds != s.r_mds {
        return Some("compiled and source modes differ".into());
    }
    None
}

fn run_pair(
    input: &DecompInput<'_>,
    m1: &Mem,
    m2: &Mem,
    max_steps: usize,
    havoc: Option<&HavocConfig>,
    run: u64,
) -> Result<CheckReport, HarnessError> {
    let policy = input.policy;
    let interp = policy.interp();
    let mut a = side(input, m1);
    let mut b = side(input, m2);
    let mut budget = havoc.map(|h| HavocBudget::new(h, run));
    let fail = |step: usize, pc: usize, pred: &str, detail: String, budget: &Option<HavocBudget>| {
        let mut c = Counterexample::new(pred, detail);
        c.init_mems = vec![m1.clone(), m2.clone()];
        c.step = Some(step);
        c.pc = Some(pc);
        if let Some(h) = budget {
            c.perturbations = h.applied.clone();
        }
        Ok(CheckReport::violated(CHECK, c))
    };

    let mut steps = 0;
    loop {
        let pc = a.r.pc;
        if a.r.stopped() != b.r.stopped() {
            return fail(
                steps,
                pc,
                "stopping",
                "one run stopped, the other did not".into(),
                &budget,
            );
        }
        if a.r.pc != b.r.pc || a.r.prog != b.r.prog {
            return fail(
                steps,
                pc,
                "program counter",
                format!("pc {} vs {}", a.r.pc, b.r.pc),
                &budget,
            );
        }
        if a.r_mds != b.r_mds {
            return fail(steps, pc, "modes", format!("{} vs {}", a.r_mds, b.r_mds), &budget);
        }
        if let Some(addr) = policy.first_low_mds_diff(&a.r_mds, &a.r_mem, &b.r_mem) {
            return fail(
                steps,
                pc,
                "low equivalence modulo modes",
                format!("{addr} is {} vs {}", a.r_mem.get(&addr), b.r_mem.get(&addr)),
                &budget,
            );
        }
        for s in [&a, &b] {
            if let Some(d) = edge_failure(s) {
                return fail(steps, pc, "refinement edge", d, &budget);
            }
        }
        if a.r.stopped() || steps >= max_steps {
            break;
        }
        let n = abs_steps(&a.w_cmd, &a.r);
        let n2 = abs_steps(&b.w_cmd, &b.r);
        if n != n2 {
            return fail(steps, pc, "pacing", format!("{n} vs {n2} source steps"), &budget);
        }
        if let Some(h) = budget.as_mut() {
            if h.fire() {
                let d = havoc_low_eq(&mut h.rng, policy, &a.r_mds, &mut a.r_mem, &mut b.r_mem);
                a.w_mem = a.r_mem.clone();
                b.w_mem = b.r_mem.clone();
                h.record(steps, d);
            }
        }
        for s in [&mut a, &mut b] {
            s.r.step(&mut s.r_mds, &mut s.r_mem, interp)?;
            for _ in 0..n {
                if s.w_cmd.is_stop() {
                    return fail(steps, pc, "pacing", "source stopped early".into(), &budget);
                }
                let (c, _) = step_while(&s.w_cmd, &mut s.w_mds, &mut s.w_mem, interp)?;
                s.w_cmd = c;
            }
        }
        steps += 1;
    }
    let mut rep = CheckReport::ok(CHECK);
    rep.count("pairs", 1);
    rep.count("steps", steps as u64);
    Ok(rep)
}

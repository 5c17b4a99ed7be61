//! Runtime check that a compiled thread refines its source.
//!
//! Both sides start from the same memory. Each RISC step is matched by the
//! number of source steps given by [`abs_steps`]; afterwards memories and
//! mode states must coincide and the registers must agree with the
//! compilation record at the new program counter.

use rayon::prelude::*;

use super::havoc::{havoc_identical, HavocBudget, HavocConfig};
use super::pacing::abs_steps;
use super::report::{CheckReport, Counterexample};
use super::HarnessError;
use crate::compiler::{asmrec_mds_consistent, regrec_mem_inconsistency, CompileOutput};
use crate::lang::{step_while, Cmd};
use crate::model::{Mem, ModeState, Policy};
use crate::risc::RiscState;

pub const CHECK: &str = "refinement";

/// Inputs shared by every run.
pub struct RefinementInput<'a> {
    pub cmd: &'a Cmd,
    pub output: &'a CompileOutput,
    pub risc: RiscState,
    pub policy: &'a Policy,
    pub mds: ModeState,
}

pub fn check_refinement(
    input: &RefinementInput<'_>,
    init_mems: &[Mem],
    max_steps: usize,
    havoc: Option<&HavocConfig>,
) -> Result<CheckReport, HarnessError> {
    let modes: Vec<Option<&HavocConfig>> = std::iter::once(None).chain(havoc.map(Some)).collect();
    let jobs: Vec<(usize, Option<&HavocConfig>)> = modes
        .iter()
        .flat_map(|h| (0..init_mems.len()).map(move |i| (i, *h)))
        .collect();
    let parts: Vec<CheckReport> = jobs
        .par_iter()
        .map(|&(i, h)| run_one(input, &init_mems[i], max_steps, h, i as u64))
        .collect::<Result<_, _>>()?;
    let mut r = CheckReport::merge(CHECK, parts)
        .bound("init_mems", init_mems.len())
        .bound("max_steps", max_steps);
    if let Some(h) = havoc {
        r = r.bound("havoc_samples", h.samples).bound("havoc_seed", h.seed);
    }
    Ok(r)
}

fn run_one(
    input: &RefinementInput<'_>,
    mem0: &Mem,
    max_steps: usize,
    havoc: Option<&HavocConfig>,
    run: u64,
) -> Result<CheckReport, HarnessError> {
    let interp = input.policy.interp();
    let mut w_cmd = input.cmd.clone();
    let mut w_mds = input.mds.clone();
    let mut w_mem = mem0.clone();
    let mut r = input.risc.clone();
    let mut r_mds = input.mds.clone();
    let mut r_mem = mem0.clone();
    let mut budget = havoc.map(|h| HavocBudget::new(h, run));

    let fail = |step: usize, pc: usize, pred: &str, detail: String, budget: &Option<HavocBudget>| {
        let mut c = Counterexample::new(pred, detail);
        c.init_mems = vec![mem0.clone()];
        c.step = Some(step);
        c.pc = Some(pc);
        if let Some(b) = budget {
            c.perturbations = b.applied.clone();
        }
        Ok(CheckReport::violated(CHECK, c))
    };

    let rec0 = input.output.rec_at(r.pc);
    if !asmrec_mds_consistent(&rec0.asmrec, &r_mds) || regrec_mem_inconsistency(&rec0.regrec, &r.regs, &r_mem).is_some()
    {
        return fail(
            0,
            r.pc,
            "initial consistency",
            "initial record does not hold".into(),
            &budget,
        );
    }

    let mut steps = 0;
    while !r.stopped() && steps < max_steps {
        if let Some(b) = budget.as_mut() {
            if b.fire() {
                let d = havoc_identical(&mut b.rng, input.policy, &r_mds, &mut [&mut r_mem, &mut w_mem]);
                b.record(steps, d);
            }
        }
        let n = abs_steps(&w_cmd, &r);
        let pc = r.pc;
        r.step(&mut r_mds, &mut r_mem, interp)?;
        for _ in 0..n {
            if w_cmd.is_stop() {
                return fail(
                    steps,
                    pc,
                    "pacing",
                    "source stopped before the compiled step was matched".into(),
                    &budget,
                );
            }
            let (c, _) = step_while(&w_cmd, &mut w_mds, &mut w_mem, interp)?;
            w_cmd = c;
        }
        steps += 1;
        if r_mem != w_mem {
            let diff: Vec<String> = r_mem.diff(&w_mem).iter().map(|a| a.to_string()).collect();
            return fail(
                steps,
                pc,
                "memory agreement",
                format!("memories differ at {}", diff.join(", ")),
                &budget,
            );
        }
        if r_mds != w_mds {
            return fail(
                steps,
                pc,
                "mode agreement",
                format!("compiled {r_mds} vs source {w_mds}"),
                &budget,
            );
        }
        let rec = input.output.rec_at(r.pc);
        if let Some(reg) = regrec_mem_inconsistency(&rec.regrec, &r.regs, &r_mem) {
            let e = &rec.regrec[&reg];
            return fail(
                steps,
                r.pc,
                "register record",
                format!(
                    "r{reg} = {} but record says {e} = {}",
                    r.regs[reg as usize],
                    e.eval(&r_mem)
                ),
                &budget,
            );
        }
        if !asmrec_mds_consistent(&rec.asmrec, &r_mds) {
            return fail(
                steps,
                r.pc,
                "assumption record",
                format!("record {} vs modes {r_mds}", rec),
                &budget,
            );
        }
    }
    if r.stopped() && !w_cmd.is_stop() {
        return fail(
            steps,
            r.pc,
            "termination",
            format!("compiled code stopped, source still at {w_cmd:#}"),
            &budget,
        );
    }
    let mut rep = CheckReport::ok(CHECK);
    rep.count("runs", 1);
    rep.count("steps", steps as u64);
    if r.stopped() {
        rep.count("terminated", 1);
    }
    Ok(rep)
}

//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mixsec::compiler::{compile, compile_cmd, finalize, joinable, AsmRec, CompRec, CompileCtx};
use mixsec::corpus::{initial_memories, load_corpus, Entry};
use mixsec::harness::{
    check_decomposed, check_global_compat, check_refinement, check_system_security, compat_violation, low_eq_pairs,
    CheckReport, DecompInput, GlobalConf, RefinementInput, ScheduleSpec, ThreadState,
};
use mixsec::lang::{init_mds, lock_acq_upd, parse_cmd, parse_expr};
use mixsec::model::{Lock, LockInterp, Mem, Policy, Var};
use mixsec::risc::{Instr, RiscState, DEFAULT_REGISTERS};

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn entry(name: &str) -> Entry {
    Entry::load(&corpus_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn accepted_entries() -> Vec<Entry> {
    load_corpus(&corpus_dir())
        .expect("corpus loads")
        .into_iter()
        .filter(Entry::expects_accept)
        .collect()
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    if took <= limit {
        Ok(())
    } else {
        Err(format!("took {:.2} s, limit {} s", took.as_secs_f64(), limit.as_secs()))
    }
}

fn first_violation(reports: &[CheckReport]) -> Result<(), String> {
    match reports.iter().find(|r| !r.is_ok()) {
        None => Ok(()),
        Some(r) => Err(r.summary()),
    }
}

fn while_threads(e: &Entry) -> Vec<ThreadState> {
    e.threads.iter().map(|(_, c)| ThreadState::While(c.clone())).collect()
}

fn risc_threads(e: &Entry) -> Vec<ThreadState> {
    e.compile(DEFAULT_REGISTERS)
        .expect("entry compiles")
        .into_iter()
        .map(|c| ThreadState::Risc(RiscState::new(c.program, DEFAULT_REGISTERS)))
        .collect()
}

fn corpus_compilation() -> Outcome {
    let start = Instant::now();
    let mut compiled = Vec::new();
    for name in ["worker", "cddc"] {
        let e = entry(name);
        e.compile(DEFAULT_REGISTERS).map_err(|err| format!("{name}: {err}"))?;
        compiled.push(format!("{name} ({} threads)", e.threads.len()));
    }
    let cddc = entry("cddc");
    if cddc.threads.len() != 3 {
        return Err(format!("cddc has {} threads, expected 3", cddc.threads.len()));
    }
    for name in ["racy", "if-lock-mismatch"] {
        match entry(name).compile(DEFAULT_REGISTERS) {
            Ok(_) => return Err(format!("{name} compiled")),
            Err(err) if !err.error.is_stability() => return Err(format!("{name}: wrong reason: {err}")),
            Err(_) => {}
        }
    }
    within(start, Duration::from_secs(1))?;
    Ok(format!(
        "{} accepted, racy and if-lock-mismatch rejected by stability",
        compiled.join(", ")
    ))
}

fn codegen_shape() -> Outcome {
    let policy = Policy::from_spec(&[("v", "low")], LockInterp::new().with_lock("v_lock", &[], &["v"])).unwrap();
    let rec = CompRec {
        regrec: Default::default(),
        asmrec: AsmRec {
            no_w: BTreeSet::new(),
            no_rw: BTreeSet::from([Var::new("v")]),
        },
    };
    let c = parse_cmd("if v != 0 then skip else skip fi").unwrap();
    let out = compile_cmd(CompileCtx::new(&policy, DEFAULT_REGISTERS), &rec, None, 0, &c);
    if let Some(e) = &out.error {
        return Err(e.to_string());
    }
    let got: Vec<String> = out
        .annotated
        .iter()
        .map(|a| {
            let l = a.label.map(|l| format!("L{l}: ")).unwrap_or_default();
            let prime = if a.epilogue && a.instr == Instr::Nop { "'" } else { "" };
            format!("{l}{}{prime}", a.instr)
        })
        .collect();
    let want = [
        "load r0 v",
        "movk r1 0",
        "op != r0 r1",
        "jz L0 r0",
        "nop",
        "jmp L1",
        "L0: nop",
        "nop'",
    ];
    if got != want {
        return Err(format!("got {got:?}"));
    }
    if out.exit_label != Some(1) {
        return Err(format!("exit label {:?}, expected L1", out.exit_label));
    }
    let prog = finalize(&out).map_err(|e| e.to_string())?;
    if prog.resolve(1) != Ok(prog.len()) {
        return Err("exit label does not resolve to the program end".into());
    }
    Ok("8 instructions, branch target on the else arm, exit L1".into())
}

fn refinement() -> Outcome {
    let start = Instant::now();
    let mut programs = 0;
    let mut mems_used = usize::MAX;
    for e in accepted_entries() {
        let mds = init_mds(e.policy.interp());
        let mems = initial_memories(&e.policy, 100, 11);
        mems_used = mems_used.min(mems.len());
        let compiled = e.compile(DEFAULT_REGISTERS).map_err(|err| err.to_string())?;
        for (i, c) in compiled.iter().enumerate() {
            let input = RefinementInput {
                cmd: &e.threads[i].1,
                output: &c.output,
                risc: RiscState::new(c.program.clone(), DEFAULT_REGISTERS),
                policy: &e.policy,
                mds: mds.clone(),
            };
            let rep = check_refinement(&input, &mems, 10_000, None).map_err(|err| err.to_string())?;
            first_violation(&[rep]).map_err(|m| format!("{} thread {i}: {m}", e.name()))?;
            programs += 1;
        }
    }
    if mems_used < 100 {
        return Err(format!("only {mems_used} initial memories"));
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("{programs} programs, at least {mems_used} memories each"))
}

fn decomposition() -> Outcome {
    let start = Instant::now();
    let mut programs = 0;
    let mut pair_count = 0;
    for e in accepted_entries() {
        let mds = init_mds(e.policy.interp());
        let pairs = low_eq_pairs(&e.policy, &mds);
        pair_count += pairs.len();
        let expect_ok = e
            .manifest
            .expect
            .get("decomp")
            .is_none_or(|v| *v == mixsec::harness::Verdict::Ok);
        let compiled = e.compile(DEFAULT_REGISTERS).map_err(|err| err.to_string())?;
        let mut reports = Vec::new();
        for (i, c) in compiled.iter().enumerate() {
            let input = DecompInput {
                cmd: &e.threads[i].1,
                risc: RiscState::new(c.program.clone(), DEFAULT_REGISTERS),
                policy: &e.policy,
                mds: mds.clone(),
            };
            reports.push(
                check_decomposed(&input, &pairs, e.manifest.bounds.max_steps, None).map_err(|err| err.to_string())?,
            );
            programs += 1;
        }
        let ok = reports.iter().all(CheckReport::is_ok);
        if ok != expect_ok {
            return Err(format!(
                "{}: expected {}, {}",
                e.name(),
                if expect_ok { "ok" } else { "a violation" },
                first_violation(&reports).err().unwrap_or_else(|| "got ok".into())
            ));
        }
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "{programs} programs over {pair_count} low-equivalent pairs, verdicts as declared"
    ))
}

fn hyperproperty() -> Outcome {
    let start = Instant::now();
    let runs = [
        ("worker", ScheduleSpec::Exhaustive { max_len: 8 }),
        (
            "cddc",
            ScheduleSpec::Random {
                count: 200,
                len: 40,
                seed: 7,
            },
        ),
    ];
    let mut parts = Vec::new();
    for (name, spec) in runs {
        let e = entry(name);
        let pairs = low_eq_pairs(&e.policy, &init_mds(e.policy.interp()));
        let w = check_system_security(&e.policy, &while_threads(&e), &pairs, &spec).map_err(|err| err.to_string())?;
        let r = check_system_security(&e.policy, &risc_threads(&e), &pairs, &spec).map_err(|err| err.to_string())?;
        if w.verdict != r.verdict {
            return Err(format!("{name}: while {} but risc {}", w.verdict, r.verdict));
        }
        first_violation(&[w, r]).map_err(|m| format!("{name}: {m}"))?;
        parts.push(format!("{name} ok at both levels ({spec})"));
    }
    within(start, Duration::from_secs(300))?;
    Ok(parts.join("; "))
}

fn global_compatibility() -> Outcome {
    let spec = ScheduleSpec::Exhaustive { max_len: 8 };
    let mut systems = 0;
    for e in accepted_entries() {
        let mems: Vec<Mem> = e
            .policy
            .enumerate_memories()
            .into_iter()
            .filter(Mem::no_locks_held)
            .collect();
        for (level, threads) in [("while", while_threads(&e)), ("risc", risc_threads(&e))] {
            for m in &mems {
                let root = GlobalConf::new(threads.clone(), m.clone(), e.policy.interp());
                let rep = check_global_compat(&e.policy, &root, &spec).map_err(|err| err.to_string())?;
                first_violation(&[rep]).map_err(|msg| format!("{} [{level}]: {msg}", e.name()))?;
            }
        }
        systems += 1;
    }
    let interp = LockInterp::new().with_lock("k", &["x"], &[]);
    let policy = Policy::from_spec(&[("x", "low")], interp.clone()).unwrap();
    let mut g = GlobalConf::new(
        vec![
            ThreadState::While(parse_cmd("skip").unwrap()),
            ThreadState::While(parse_cmd("skip").unwrap()),
        ],
        Mem::new().with_lock("k", 1),
        &interp,
    );
    let held = lock_acq_upd(&g.threads[0].mds, &Lock::new("k"), &interp).unwrap();
    for t in &mut g.threads {
        t.mds = held.clone();
    }
    let finding = compat_violation(&policy, &g).ok_or("two-holder configuration not flagged")?;
    Ok(format!(
        "{systems} systems ok at both levels; two holders flagged by `{}`",
        finding.predicate
    ))
}

fn expression_oracle() -> Outcome {
    let policy = expr_policy();
    let mut r = rng(2024);
    let mut mems = Vec::new();
    for x in 0..=2 {
        for y in 0..=2 {
            for z in 0..=2 {
                mems.push(Mem::new().with_var("x", x).with_var("y", y).with_var("z", z));
            }
        }
    }
    for n in 0..1000 {
        let e = gen_expr(&mut r, 4, &["x", "y", "z"]);
        for m in &mems {
            let (got, rec) = run_compiled_expr(&policy, &e, m);
            if got != e.eval(m) {
                return Err(format!(
                    "expression {n} `{e}` at {m}: compiled {got}, evaluated {}",
                    e.eval(m)
                ));
            }
            if rec.as_ref() != Some(&e) {
                return Err(format!("expression {n} `{e}`: record holds {rec:?}"));
            }
        }
    }
    let e = parse_expr("x + (x + 1)").unwrap();
    for m in &mems {
        let (got, _) = run_compiled_expr(&policy, &e, m);
        let want = 2 * m.var(&Var::new("x")) + 1;
        if got != want {
            return Err(format!("x + (x + 1) at {m}: {got}, expected {want}"));
        }
    }
    Ok(format!("1000 expressions x {} memories, plus x + (x + 1)", mems.len()))
}

fn joinable_pairs() -> Outcome {
    let policy = gen_policy();
    let ctx = CompileCtx::new(&policy, DEFAULT_REGISTERS);
    let mut r = rng(99);
    for n in 0..500 {
        let (p1, p2) = (gen_program(&mut r, 3), gen_program(&mut r, 3));
        let o1 = compile_cmd(ctx, &CompRec::initial(), None, 0, &p1);
        let o2 = compile_cmd(ctx, &o1.final_rec, o1.exit_label, o1.next_label, &p2);
        if let Some(e) = o1.error.as_ref().or(o2.error.as_ref()) {
            return Err(format!("pair {n} rejected: {e}"));
        }
        if !joinable(&o1.instrs(), &o2.instrs()) {
            return Err(format!("pair {n} not joinable"));
        }
        let mut joined = o1.clone();
        joined.annotated.extend(o2.annotated);
        joined.exit_label = o2.exit_label;
        joined.next_label = o2.next_label;
        finalize(&joined).map_err(|e| format!("pair {n}: {e}"))?;
        compile(&mixsec::lang::Cmd::seq(p1, p2), &policy, DEFAULT_REGISTERS).map_err(|e| format!("pair {n}: {e}"))?;
    }
    Ok("500 pairs joinable and finalized".into())
}

fn leak_detection() -> Outcome {
    let e = entry("worker-leaky");
    let pairs = low_eq_pairs(&e.policy, &init_mds(e.policy.interp()));
    let spec = e.manifest.bounds.schedules.spec();
    let mut parts = Vec::new();
    for (level, threads) in [("while", while_threads(&e)), ("risc", risc_threads(&e))] {
        let rep = check_system_security(&e.policy, &threads, &pairs, &spec).map_err(|err| err.to_string())?;
        let cex = rep
            .counterexample
            .ok_or_else(|| format!("{level}: no violation found"))?;
        let sched = cex
            .schedule
            .ok_or_else(|| format!("{level}: counterexample lacks a schedule"))?;
        if cex.init_mems.len() != 2 {
            return Err(format!("{level}: counterexample has {} memories", cex.init_mems.len()));
        }
        parts.push(format!("{level}: schedule of {} steps", sched.len()));
    }
    Ok(parts.join(", "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("corpus compilation", corpus_compilation),
        ("codegen shape", codegen_shape),
        ("refinement conformance", refinement),
        ("timing and coupling", decomposition),
        ("whole-system hyperproperty", hyperproperty),
        ("mode-use side conditions", global_compatibility),
        ("expression compiler oracle", expression_oracle),
        ("joinable fragments", joinable_pairs),
        ("leak detection", leak_detection),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {}. {name} ({secs:.2} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name} ({secs:.2} s): {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

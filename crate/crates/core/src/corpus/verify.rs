//! Runs harness checks against a corpus entry and compares verdicts with the
//! manifest.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::{Entry, ThreadCompileError};
use crate::compiler::Compiled;
use crate::harness::{
    self, check_decomposed, check_global_compat, check_local_compliance, check_no_high_branching, check_refinement,
    check_system_security, low_eq_pairs, random_memories, CheckReport, ComplianceBounds, Counterexample, DecompInput,
    HarnessError, HavocConfig, RefinementInput, ScheduleSpec, ThreadState, Verdict,
};
use crate::lang::init_mds;
use crate::model::{Mem, Policy};
use crate::risc::{RiscState, DEFAULT_REGISTERS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckKind {
    Discipline,
    Refine,
    Decomp,
    Nohb,
    Local,
    Global,
    Hyper,
}

impl CheckKind {
    pub const ALL: [CheckKind; 7] = [
        CheckKind::Discipline,
        CheckKind::Refine,
        CheckKind::Decomp,
        CheckKind::Nohb,
        CheckKind::Local,
        CheckKind::Global,
        CheckKind::Hyper,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Discipline => "discipline",
            CheckKind::Refine => "refine",
            CheckKind::Decomp => "decomp",
            CheckKind::Nohb => "nohb",
            CheckKind::Local => "local",
            CheckKind::Global => "global",
            CheckKind::Hyper => "hyper",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown check `{0}` (expected one of discipline, refine, decomp, nohb, local, global, hyper)")]
pub struct UnknownCheck(pub String);

impl FromStr for CheckKind {
    type Err = UnknownCheck;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownCheck(s.to_string()))
    }
}

/// Command-line overrides of an entry's manifest bounds.
#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub max_steps: Option<usize>,
    /// Replaces the schedule length (exhaustive depth or random length).
    pub sched_len: Option<usize>,
    pub seed: Option<u64>,
    pub init_mems: Option<usize>,
    pub registers: Option<usize>,
    pub schedules: Option<ScheduleSpec>,
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("compilation rejected: {0}")]
    Compile(#[from] ThreadCompileError),
}

struct Resolved {
    max_steps: usize,
    init_mems: usize,
    seed: u64,
    schedules: ScheduleSpec,
    registers: usize,
    compliance_runs: usize,
    havoc: HavocConfig,
}

fn resolve(entry: &Entry, opts: &VerifyOptions) -> Resolved {
    let b = &entry.manifest.bounds;
    let seed = opts.seed.unwrap_or(b.seed);
    let mut schedules = opts.schedules.clone().unwrap_or_else(|| b.schedules.spec());
    if let Some(n) = opts.sched_len {
        schedules = match schedules {
            ScheduleSpec::Exhaustive { .. } => ScheduleSpec::Exhaustive { max_len: n },
            ScheduleSpec::Random { count, seed, .. } => ScheduleSpec::Random { count, len: n, seed },
            ScheduleSpec::Explicit(list) => {
                ScheduleSpec::Explicit(list.into_iter().map(|s| s.into_iter().take(n).collect()).collect())
            }
        };
    }
    if let (Some(s), ScheduleSpec::Random { count, len, .. }) = (opts.seed, &schedules) {
        schedules = ScheduleSpec::Random {
            count: *count,
            len: *len,
            seed: s,
        };
    }
    Resolved {
        max_steps: opts.max_steps.unwrap_or(b.max_steps),
        init_mems: opts.init_mems.unwrap_or(b.init_mems),
        seed,
        schedules,
        registers: opts.registers.unwrap_or(DEFAULT_REGISTERS),
        compliance_runs: b.compliance_runs,
        havoc: HavocConfig {
            samples: b.havoc_samples,
            seed,
        },
    }
}

/// Every enumerated memory without held locks, topped up with seeded random
/// memories until there are at least `count`.
pub fn initial_memories(policy: &Policy, count: usize, seed: u64) -> Vec<Mem> {
    let mut mems: Vec<Mem> = policy.enumerate_memories();
    mems.retain(Mem::no_locks_held);
    if mems.len() < count {
        mems.extend(random_memories(policy, count - mems.len(), seed));
    }
    mems
}

fn tag_thread(mut r: CheckReport, thread: usize) -> CheckReport {
    if let Some(c) = r.counterexample.as_mut() {
        c.thread.get_or_insert(thread);
    }
    r
}

fn per_thread(
    name: &str,
    level: &str,
    n: usize,
    mut f: impl FnMut(usize) -> Result<CheckReport, HarnessError>,
) -> Result<CheckReport, HarnessError> {
    let mut parts = Vec::with_capacity(n);
    for i in 0..n {
        parts.push(tag_thread(f(i)?, i));
    }
    Ok(CheckReport::merge(name, parts).with_level(level))
}

fn risc_state(c: &Compiled) -> RiscState {
    RiscState::new(c.program.clone(), c.registers)
}

/// Runs `checks` on `entry`, returning one report per check and level in a
/// fixed order.
pub fn verify(entry: &Entry, checks: &[CheckKind], opts: &VerifyOptions) -> Result<Vec<CheckReport>, VerifyError> {
    let r = resolve(entry, opts);
    let policy = &entry.policy;
    let mds0 = init_mds(policy.interp());
    let compiled = entry.compile(r.registers)?;
    let n = entry.threads.len();
    let mems = initial_memories(policy, r.init_mems, r.seed);
    let pairs = low_eq_pairs(policy, &mds0);
    let while_threads: Vec<ThreadState> = entry
        .threads
        .iter()
        .map(|(_, c)| ThreadState::While(c.clone()))
        .collect();
    let risc_threads: Vec<ThreadState> = compiled.iter().map(|c| ThreadState::Risc(risc_state(c))).collect();
    let levels = [("while", &while_threads), ("risc", &risc_threads)];

    let mut checks = checks.to_vec();
    checks.sort();
    checks.dedup();
    let mut out = Vec::new();
    for kind in checks {
        let name = kind.name();
        match kind {
            CheckKind::Discipline => {
                let vs = policy.check_lock_discipline();
                let rep = match vs.first() {
                    None => CheckReport::ok(name),
                    Some(v) => CheckReport::violated(
                        name,
                        Counterexample::new(format!("restriction {}", v.restriction), &v.message),
                    ),
                };
                out.push(rep.bound("locks", policy.interp().lock_names().count()));
            }
            CheckKind::Refine => {
                out.push(per_thread(name, "risc", n, |i| {
                    let input = RefinementInput {
                        cmd: &entry.threads[i].1,
                        output: &compiled[i].output,
                        risc: risc_state(&compiled[i]),
                        policy,
                        mds: mds0.clone(),
                    };
                    check_refinement(&input, &mems, r.max_steps, Some(&r.havoc))
                })?);
            }
            CheckKind::Decomp => {
                out.push(per_thread(name, "risc", n, |i| {
                    let input = DecompInput {
                        cmd: &entry.threads[i].1,
                        risc: risc_state(&compiled[i]),
                        policy,
                        mds: mds0.clone(),
                    };
                    check_decomposed(&input, &pairs, r.max_steps, Some(&r.havoc))
                })?);
            }
            CheckKind::Nohb => {
                out.push(per_thread(name, "while", n, |i| {
                    check_no_high_branching(&entry.threads[i].1, policy, &mds0, &pairs, r.max_steps)
                })?);
            }
            CheckKind::Local => {
                let bounds = ComplianceBounds {
                    runs: r.compliance_runs,
                    max_steps: r.max_steps,
                    havoc_rate: 0.25,
                    seed: r.seed,
                };
                for (level, threads) in levels {
                    out.push(per_thread(name, level, n, |i| {
                        check_local_compliance(&threads[i], policy, &mds0, &mems, &bounds)
                    })?);
                }
            }
            CheckKind::Global => {
                for (level, threads) in levels {
                    let parts = mems
                        .iter()
                        .take(r.init_mems.clamp(1, 8))
                        .map(|m| {
                            let root = harness::GlobalConf::new(threads.clone(), m.clone(), policy.interp());
                            check_global_compat(policy, &root, &r.schedules)
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    out.push(CheckReport::merge(name, parts).with_level(level));
                }
            }
            CheckKind::Hyper => {
                for (level, threads) in levels {
                    let rep = check_system_security(policy, threads, &pairs, &r.schedules)?;
                    out.push(CheckReport::merge(name, [rep]).with_level(level));
                }
            }
        }
    }
    Ok(out)
}

/// A check whose verdict differs from the manifest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub check: String,
    pub level: Option<String>,
    pub expected: Verdict,
    pub actual: Verdict,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = self.level.as_deref().map(|l| format!(" [{l}]")).unwrap_or_default();
        write!(
            f,
            "{}{}: expected {}, got {}",
            self.check, level, self.expected, self.actual
        )
    }
}

/// Reports whose verdict contradicts the entry's manifest. Checks the
/// manifest does not mention are not compared.
pub fn check_expectations(entry: &Entry, reports: &[CheckReport]) -> Vec<Mismatch> {
    reports
        .iter()
        .filter_map(|r| {
            let expected = *entry.manifest.expect.get(&r.check)?;
            (expected != r.verdict).then(|| Mismatch {
                check: r.check.clone(),
                level: r.level.clone(),
                expected,
                actual: r.verdict,
            })
        })
        .collect()
}

//! Bounded exploration: schedules, initial memories and memory pairs.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::HarnessError;
use crate::model::{Mem, ModeState, Policy};

/// Which schedules a check explores.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScheduleSpec {
    /// Every schedule up to `max_len` steps, depth first in thread order.
    Exhaustive {
        max_len: usize,
    },
    /// Seeded random schedules of exactly `len` steps. The first ones run a
    /// single thread, the rest pick a thread and a burst length at random.
    Random {
        count: usize,
        len: usize,
        seed: u64,
    },
    Explicit(Vec<Vec<usize>>),
}

impl fmt::Display for ScheduleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleSpec::Exhaustive { max_len } => write!(f, "exhaustive(len<={max_len})"),
            ScheduleSpec::Random { count, len, seed } => {
                write!(f, "random(count={count}, len={len}, seed={seed})")
            }
            ScheduleSpec::Explicit(s) => write!(f, "explicit({} schedules)", s.len()),
        }
    }
}

/// Longest burst a random schedule gives one thread.
const MAX_BURST: usize = 8;

pub fn random_schedules(threads: usize, count: usize, len: usize, seed: u64) -> Vec<Vec<usize>> {
    if threads == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<usize>> = (0..threads.min(count)).map(|t| vec![t; len]).collect();
    while out.len() < count {
        let mut s = Vec::with_capacity(len);
        while s.len() < len {
            let t = rng.random_range(0..threads);
            let burst = rng.random_range(1..=MAX_BURST).min(len - s.len());
            s.extend(std::iter::repeat_n(t, burst));
        }
        out.push(s);
    }
    out
}

/// A violated predicate found while exploring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub predicate: String,
    pub detail: String,
    pub thread: Option<usize>,
}

impl Finding {
    pub fn new(predicate: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            predicate: predicate.into(),
            detail: detail.into(),
            thread: None,
        }
    }

    pub fn in_thread(mut self, t: usize) -> Self {
        self.thread = Some(t);
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Exploration {
    /// The schedule prefix reaching the violating state, with the finding.
    pub finding: Option<(Vec<usize>, Finding)>,
    pub states: u64,
}

/// Explores the states reachable from `root` under `spec`, checking every
/// prefix. `step` returns whether anything moved; a stuttering step is not
/// explored further in exhaustive mode since its subtree repeats its parent's.
pub fn explore<S, St, Ck>(
    root: &S,
    threads: usize,
    spec: &ScheduleSpec,
    step: St,
    check: Ck,
) -> Result<Exploration, HarnessError>
where
    S: Clone,
    St: Fn(&mut S, usize) -> Result<bool, HarnessError>,
    Ck: Fn(&S) -> Option<Finding>,
{
    let mut ex = Exploration {
        finding: None,
        states: 1,
    };
    if let Some(f) = check(root) {
        ex.finding = Some((Vec::new(), f));
        return Ok(ex);
    }
    match spec {
        ScheduleSpec::Exhaustive { max_len } => {
            let mut prefix = Vec::new();
            dfs(root, threads, *max_len, &step, &check, &mut prefix, &mut ex)?;
        }
        ScheduleSpec::Random { count, len, seed } => {
            let schedules = random_schedules(threads, *count, *len, *seed);
            run_list(root, &schedules, &step, &check, &mut ex)?;
        }
        ScheduleSpec::Explicit(list) => run_list(root, list, &step, &check, &mut ex)?,
    }
    Ok(ex)
}

fn dfs<S: Clone>(
    s: &S,
    threads: usize,
    budget: usize,
    step: &dyn Fn(&mut S, usize) -> Result<bool, HarnessError>,
    check: &dyn Fn(&S) -> Option<Finding>,
    prefix: &mut Vec<usize>,
    ex: &mut Exploration,
) -> Result<(), HarnessError> {
    if budget == 0 {
        return Ok(());
    }
    for t in 0..threads {
        let mut next = s.clone();
        if !step(&mut next, t)? {
            continue;
        }
        ex.states += 1;
        prefix.push(t);
        if let Some(f) = check(&next) {
            ex.finding = Some((prefix.clone(), f));
            return Ok(());
        }
        dfs(&next, threads, budget - 1, step, check, prefix, ex)?;
        if ex.finding.is_some() {
            return Ok(());
        }
        prefix.pop();
    }
    Ok(())
}

fn run_list<S: Clone>(
    root: &S,
    schedules: &[Vec<usize>],
    step: &dyn Fn(&mut S, usize) -> Result<bool, HarnessError>,
    check: &dyn Fn(&S) -> Option<Finding>,
    ex: &mut Exploration,
) -> Result<(), HarnessError> {
    for sched in schedules {
        let mut s = root.clone();
        for (n, &t) in sched.iter().enumerate() {
            if !step(&mut s, t)? {
                continue;
            }
            ex.states += 1;
            if let Some(f) = check(&s) {
                ex.finding = Some((sched[..=n].to_vec(), f));
                return Ok(());
            }
        }
    }
    Ok(())
}

/// Pairs of enumerated initial memories that agree modulo `mds` and hold no
/// locks, each unordered pair once (identical pairs included).
pub fn low_eq_pairs(policy: &Policy, mds: &ModeState) -> Vec<(Mem, Mem)> {
    let mems: Vec<Mem> = policy
        .enumerate_memories()
        .into_iter()
        .filter(Mem::no_locks_held)
        .collect();
    let mut out = Vec::new();
    for (i, m1) in mems.iter().enumerate() {
        for m2 in &mems[i..] {
            if policy.low_eq_mod_modes(mds, m1, m2) {
                out.push((m1.clone(), m2.clone()));
            }
        }
    }
    out
}

/// Seeded random initial memories with no locks held. Values come from each
/// variable's enumeration domain half of the time and from a small integer
/// range otherwise.
pub fn random_memories(policy: &Policy, count: usize, seed: u64) -> Vec<Mem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut m = Mem::new();
            for v in policy.var_names() {
                let dom = policy.enumeration_domain(v);
                let x = if rng.random_bool(0.5) && !dom.is_empty() {
                    dom[rng.random_range(0..dom.len())]
                } else {
                    rng.random_range(-4..=4)
                };
                m.set_var(v, x);
            }
            m
        })
        .collect()
}

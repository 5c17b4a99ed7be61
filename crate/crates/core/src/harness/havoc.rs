//! Environment perturbations between a thread's own steps.
//!
//! Only variables writable under the thread's current modes are touched.
//! Lock variables are never perturbed: they change only through lock
//! operations.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Mem, ModeState, Policy, Value, Var};

/// How the two sides of a related pair are perturbed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HavocKind {
    /// The same write on both sides.
    Identical,
    /// Writes that keep the pair equivalent modulo modes.
    LowEq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HavocConfig {
    /// Perturbations applied per run.
    pub samples: usize,
    pub seed: u64,
}

fn random_value(rng: &mut ChaCha8Rng, policy: &Policy, v: &Var) -> Value {
    let dom = policy.enumeration_domain(v);
    if rng.random_bool(0.5) && !dom.is_empty() {
        dom[rng.random_range(0..dom.len())]
    } else {
        rng.random_range(-4..=4)
    }
}

fn writable(policy: &Policy, mds: &ModeState) -> Vec<Var> {
    policy.var_names().filter(|v| mds.writable(v)).cloned().collect()
}

/// Writes one random writable variable to the same value in every memory.
/// Returns a description, or `None` when nothing is writable.
pub fn havoc_identical(
    rng: &mut ChaCha8Rng,
    policy: &Policy,
    mds: &ModeState,
    mems: &mut [&mut Mem],
) -> Option<String> {
    let cands = writable(policy, mds);
    if cands.is_empty() {
        return None;
    }
    let v = &cands[rng.random_range(0..cands.len())];
    let x = random_value(rng, policy, v);
    for m in mems.iter_mut() {
        m.set_var(v, x);
    }
    Some(format!("{v} := {x}"))
}

/// Writes one random writable variable in a way that keeps `m1` and `m2`
/// equivalent modulo `mds`. A control variable is only chosen when all of its
/// dependents are writable too; they are then reset to a common value so the
/// reclassification cannot expose a difference.
pub fn havoc_low_eq(
    rng: &mut ChaCha8Rng,
    policy: &Policy,
    mds: &ModeState,
    m1: &mut Mem,
    m2: &mut Mem,
) -> Option<String> {
    let cands: Vec<Var> = writable(policy, mds)
        .into_iter()
        .filter(|v| !policy.cset().contains(v) || policy.dependents(v).all(|d| mds.writable(d)))
        .collect();
    if cands.is_empty() {
        return None;
    }
    let v = &cands[rng.random_range(0..cands.len())];
    let x = random_value(rng, policy, v);
    if policy.cset().contains(v) {
        m1.set_var(v, x);
        m2.set_var(v, x);
        let mut desc = format!("{v} := {x}");
        let deps: Vec<Var> = policy.dependents(v).cloned().collect();
        for d in deps {
            let y = random_value(rng, policy, &d);
            m1.set_var(&d, y);
            m2.set_var(&d, y);
            desc.push_str(&format!(", {d} := {y}"));
        }
        return Some(desc);
    }
    let low = matches!(policy.dma_var(m1, v), Ok(crate::model::Level::Low));
    if low {
        m1.set_var(v, x);
        m2.set_var(v, x);
        Some(format!("{v} := {x}"))
    } else {
        let y = random_value(rng, policy, v);
        m1.set_var(v, x);
        m2.set_var(v, y);
        Some(format!("{v} := {x} | {y}"))
    }
}

/// Per-run budget tracker: perturbs with probability one half before each
/// step until the budget is spent.
#[derive(Debug)]
pub struct HavocBudget {
    pub rng: ChaCha8Rng,
    pub left: usize,
    pub applied: Vec<String>,
}

impl HavocBudget {
    pub fn new(cfg: &HavocConfig, run: u64) -> Self {
        use rand::SeedableRng;
        Self {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed ^ run.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            left: cfg.samples,
            applied: Vec::new(),
        }
    }

    pub fn fire(&mut self) -> bool {
        self.left > 0 && self.rng.random_bool(0.5)
    }

    pub fn record(&mut self, step: usize, desc: Option<String>) {
        self.left -= 1;
        if let Some(d) = desc {
            self.applied.push(format!("before step {step}: {d}"));
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;

    use super::*;
    use crate::lang::{init_mds, lock_acq_upd};
    use crate::model::{Lock, LockInterp};

    fn policy() -> Policy {
        Policy::from_spec(
            &[
                ("c", "low"),
                ("d", "dep:c=0"),
                ("h", "high"),
                ("l", "low"),
                ("g", "low"),
            ],
            LockInterp::new().with_lock("k", &["g"], &[]),
        )
        .unwrap()
    }

    #[test]
    fn only_writable_variables_change() {
        let p = policy();
        let mds = lock_acq_upd(&init_mds(p.interp()), &Lock::new("k"), p.interp()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let mut a = Mem::new();
            let mut b = Mem::new();
            havoc_identical(&mut rng, &p, &mds, &mut [&mut a, &mut b]);
            assert_eq!(a, b);
            assert_eq!(a.var(&Var::new("g")), 0);
        }
    }

    #[test]
    fn low_eq_preserved() {
        let p = policy();
        let mds = init_mds(p.interp());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut a = Mem::new().with_var("c", 1).with_var("d", 5);
        let mut b = Mem::new().with_var("c", 1).with_var("d", 7);
        for _ in 0..500 {
            havoc_low_eq(&mut rng, &p, &mds, &mut a, &mut b);
            assert!(p.low_eq_mod_modes(&mds, &a, &b), "{a} vs {b}");
        }
    }

    #[test]
    fn nothing_writable() {
        let p = Policy::from_spec(&[("g", "low")], LockInterp::new().with_lock("k", &[], &["g"])).unwrap();
        let mds = lock_acq_upd(&init_mds(p.interp()), &Lock::new("k"), p.interp()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut a = Mem::new();
        assert_eq!(havoc_identical(&mut rng, &p, &mds, &mut [&mut a]), None);
    }
}

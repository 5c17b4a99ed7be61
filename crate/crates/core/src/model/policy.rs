use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Addr, Lock, Mem, ModeState, Value, Var};

/// Security level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Low,
    High,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Low => "Low",
            Level::High => "High",
        })
    }
}

/// Classification of one program variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Static(Level),
    /// Low exactly when the control variable holds one of `low_values`.
    ValueDep {
        control: Var,
        low_values: BTreeSet<Value>,
    },
}

/// What one lock governs: variables it grants exclusive write access to, and
/// variables it grants exclusive read-write access to.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LockGovernance {
    #[serde(default)]
    pub no_w: BTreeSet<Var>,
    #[serde(default)]
    pub no_rw: BTreeSet<Var>,
}

impl LockGovernance {
    pub fn governed(&self) -> impl Iterator<Item = &Var> {
        self.no_w.iter().chain(self.no_rw.iter())
    }
}

/// Lock interpretation: the locking discipline.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LockInterp {
    locks: BTreeMap<Lock, LockGovernance>,
}

impl LockInterp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_lock(mut self, k: &str, no_w: &[&str], no_rw: &[&str]) -> Self {
        self.insert(
            Lock::new(k),
            LockGovernance {
                no_w: no_w.iter().map(|v| Var::new(v)).collect(),
                no_rw: no_rw.iter().map(|v| Var::new(v)).collect(),
            },
        );
        self
    }

    pub fn insert(&mut self, k: Lock, g: LockGovernance) {
        self.locks.insert(k, g);
    }

    pub fn get(&self, k: &Lock) -> Option<&LockGovernance> {
        self.locks.get(k)
    }

    pub fn locks(&self) -> impl Iterator<Item = (&Lock, &LockGovernance)> {
        self.locks.iter()
    }

    pub fn lock_names(&self) -> impl Iterator<Item = &Lock> {
        self.locks.keys()
    }

    pub fn is_empty(&self) -> bool {
        self.locks.is_empty()
    }

    /// Union of every lock's no-write set.
    pub fn all_no_w(&self) -> BTreeSet<Var> {
        self.locks.values().flat_map(|g| g.no_w.iter().cloned()).collect()
    }

    /// Union of every lock's no-read-write set.
    pub fn all_no_rw(&self) -> BTreeSet<Var> {
        self.locks.values().flat_map(|g| g.no_rw.iter().cloned()).collect()
    }

    /// The lock governing `v`, if any (the first one if the discipline is
    /// malformed).
    pub fn governing_lock(&self, v: &Var) -> Option<&Lock> {
        self.locks
            .iter()
            .find(|(_, g)| g.no_w.contains(v) || g.no_rw.contains(v))
            .map(|(k, _)| k)
    }

    pub fn is_governed(&self, v: &Var) -> bool {
        self.governing_lock(v).is_some()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("control variable `{control}` of `{var}` must be statically Low")]
    ControlNotLow { var: String, control: String },
    #[error("control variable `{control}` of `{var}` is not declared")]
    UndeclaredControl { var: String, control: String },
    #[error("malformed policy file: {0}")]
    Json(String),
}

/// One violated locking-discipline restriction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DisciplineViolation {
    pub restriction: u8,
    pub locks: Vec<String>,
    pub vars: Vec<String>,
    pub message: String,
}

impl fmt::Display for DisciplineViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "restriction {}: {}", self.restriction, self.message)
    }
}

/// Classification policy together with the locking discipline and the
/// initial-memory enumeration domains used by the checkers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Policy {
    vars: BTreeMap<Var, Classification>,
    cvars: BTreeMap<Var, BTreeSet<Var>>,
    cset: BTreeSet<Var>,
    interp: LockInterp,
    domains: Option<BTreeMap<Var, Vec<Value>>>,
    init: BTreeMap<Var, Value>,
}

impl Policy {
    /// Builds a policy, checking that every control variable is declared and
    /// statically Low and that locks only name declared variables.
    pub fn new(vars: BTreeMap<Var, Classification>, interp: LockInterp) -> Result<Self, PolicyError> {
        let mut cvars = BTreeMap::new();
        let mut cset = BTreeSet::new();
        for (v, c) in &vars {
            let mut set = BTreeSet::new();
            if let Classification::ValueDep { control, .. } = c {
                match vars.get(control) {
                    None => {
                        return Err(PolicyError::UndeclaredControl {
                            var: v.to_string(),
                            control: control.to_string(),
                        })
                    }
                    Some(Classification::Static(Level::Low)) => {}
                    Some(_) => {
                        return Err(PolicyError::ControlNotLow {
                            var: v.to_string(),
                            control: control.to_string(),
                        })
                    }
                }
                set.insert(control.clone());
                cset.insert(control.clone());
            }
            cvars.insert(v.clone(), set);
        }
        for (_, g) in interp.locks() {
            for v in g.governed() {
                if !vars.contains_key(v) {
                    return Err(PolicyError::UnknownVariable(v.to_string()));
                }
            }
        }
        Ok(Self {
            vars,
            cvars,
            cset,
            interp,
            domains: None,
            init: BTreeMap::new(),
        })
    }

    /// Convenience builder used throughout the tests: `("x", "low")`,
    /// `("y", "high")` or `("s", "dep:c=0,2")`.
    pub fn from_spec(vars: &[(&str, &str)], interp: LockInterp) -> Result<Self, PolicyError> {
        let mut map = BTreeMap::new();
        for (name, cls) in vars {
            let c = match *cls {
                "low" => Classification::Static(Level::Low),
                "high" => Classification::Static(Level::High),
                other => {
                    let rest = other
                        .strip_prefix("dep:")
                        .ok_or_else(|| PolicyError::Json(format!("bad classification `{other}`")))?;
                    let (control, vals) = rest
                        .split_once('=')
                        .ok_or_else(|| PolicyError::Json(format!("bad classification `{other}`")))?;
                    let low_values = vals
                        .split(',')
                        .filter(|s| !s.is_empty())
                        .map(|s| s.trim().parse::<Value>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| PolicyError::Json(e.to_string()))?;
                    Classification::ValueDep {
                        control: Var::new(control),
                        low_values,
                    }
                }
            };
            map.insert(Var::new(name), c);
        }
        Self::new(map, interp)
    }

    pub fn from_json(text: &str) -> Result<Self, PolicyError> {
        let file: PolicyFile = serde_json::from_str(text).map_err(|e| PolicyError::Json(e.to_string()))?;
        file.into_policy()
    }

    pub fn to_file(&self) -> PolicyFile {
        PolicyFile {
            variables: self.vars.iter().map(|(v, c)| (v.clone(), ClassRepr::from(c))).collect(),
            locks: self.interp.clone(),
            domains: self.domains.clone(),
            init: self.init.clone(),
        }
    }

    pub fn with_domains(mut self, domains: BTreeMap<Var, Vec<Value>>) -> Self {
        self.domains = Some(domains);
        self
    }

    /// Replaces the enumeration domain of one variable, keeping the others.
    pub fn override_domain(mut self, v: &Var, values: Vec<Value>) -> Result<Self, PolicyError> {
        if !self.is_declared(v) {
            return Err(PolicyError::UnknownVariable(v.to_string()));
        }
        if self.domains.is_none() {
            let current = self
                .vars
                .keys()
                .map(|x| (x.clone(), self.enumeration_domain(x)))
                .collect();
            self.domains = Some(current);
        }
        if let Some(d) = self.domains.as_mut() {
            d.insert(v.clone(), values);
        }
        Ok(self)
    }

    pub fn interp(&self) -> &LockInterp {
        &self.interp
    }

    pub fn variables(&self) -> impl Iterator<Item = (&Var, &Classification)> {
        self.vars.iter()
    }

    pub fn var_names(&self) -> impl Iterator<Item = &Var> {
        self.vars.keys()
    }

    pub fn is_declared(&self, v: &Var) -> bool {
        self.vars.contains_key(v)
    }

    pub fn classification(&self, v: &Var) -> Option<&Classification> {
        self.vars.get(v)
    }

    /// Control variables of `v` (empty for undeclared or static variables).
    pub fn cvars(&self, v: &Var) -> &BTreeSet<Var> {
        static EMPTY: BTreeSet<Var> = BTreeSet::new();
        self.cvars.get(v).unwrap_or(&EMPTY)
    }

    /// Every control variable in the system.
    pub fn cset(&self) -> &BTreeSet<Var> {
        &self.cset
    }

    /// Variables whose classification is controlled by `c`.
    pub fn dependents<'a>(&'a self, c: &'a Var) -> impl Iterator<Item = &'a Var> + 'a {
        self.cvars.iter().filter(move |(_, cs)| cs.contains(c)).map(|(v, _)| v)
    }

    /// Value-dependent classification of an address.
    pub fn dma(&self, mem: &Mem, a: &Addr) -> Result<Level, PolicyError> {
        match a {
            Addr::Lock(_) => Ok(Level::Low),
            Addr::Var(v) => self.dma_var(mem, v),
        }
    }

    pub fn dma_var(&self, mem: &Mem, v: &Var) -> Result<Level, PolicyError> {
        match self.vars.get(v) {
            None => Err(PolicyError::UnknownVariable(v.to_string())),
            Some(Classification::Static(l)) => Ok(*l),
            Some(Classification::ValueDep { control, low_values }) => Ok(if low_values.contains(&mem.var(control)) {
                Level::Low
            } else {
                Level::High
            }),
        }
    }

    fn is_low(&self, mem: &Mem, v: &Var) -> bool {
        matches!(self.dma_var(mem, v), Ok(Level::Low))
    }

    /// Low-equivalence: every variable Low in `m1` agrees across the two
    /// memories. Lock variables are always Low.
    pub fn low_eq(&self, m1: &Mem, m2: &Mem) -> bool {
        self.vars.keys().all(|x| !self.is_low(m1, x) || m1.var(x) == m2.var(x))
            && self.interp.lock_names().all(|k| m1.lock(k) == m2.lock(k))
    }

    /// Low-equivalence modulo modes: control variables always agree; other
    /// variables agree when Low in `m1` and readable under `mds`.
    pub fn low_eq_mod_modes(&self, mds: &ModeState, m1: &Mem, m2: &Mem) -> bool {
        self.first_low_mds_diff(mds, m1, m2).is_none()
    }

    /// The first address violating [`Policy::low_eq_mod_modes`], if any.
    pub fn first_low_mds_diff(&self, mds: &ModeState, m1: &Mem, m2: &Mem) -> Option<Addr> {
        for x in self.vars.keys() {
            let compared = self.cset.contains(x) || (self.is_low(m1, x) && mds.readable(x));
            if compared && m1.var(x) != m2.var(x) {
                return Some(Addr::Var(x.clone()));
            }
        }
        self.interp
            .lock_names()
            .find(|k| m1.lock(k) != m2.lock(k))
            .map(|k| Addr::Lock(k.clone()))
    }

    /// Values a variable ranges over when enumerating initial memories.
    pub fn enumeration_domain(&self, v: &Var) -> Vec<Value> {
        if let Some(domains) = &self.domains {
            if let Some(d) = domains.get(v) {
                return d.clone();
            }
            return vec![self.init.get(v).copied().unwrap_or(0)];
        }
        if let Some(x) = self.init.get(v) {
            return vec![*x];
        }
        let relevant =
            self.cset.contains(v) || !matches!(self.vars.get(v), Some(Classification::Static(Level::Low)) | None);
        if relevant {
            vec![0, 1]
        } else {
            vec![0]
        }
    }

    /// Every memory over the enumeration domains (lock variables all free).
    pub fn enumerate_memories(&self) -> Vec<Mem> {
        let mut out = vec![Mem::new()];
        for v in self.vars.keys() {
            let dom = self.enumeration_domain(v);
            let mut next = Vec::with_capacity(out.len() * dom.len());
            for m in &out {
                for x in &dom {
                    let mut m2 = m.clone();
                    m2.set_var(v, *x);
                    next.push(m2);
                }
            }
            out = next;
        }
        out
    }

    /// Checks the seven restrictions on locking disciplines, reporting every
    /// violation.
    pub fn check_lock_discipline(&self) -> Vec<DisciplineViolation> {
        let interp = &self.interp;
        let mut out = Vec::new();
        let lock_names: BTreeSet<&str> = interp.lock_names().map(|k| k.as_str()).collect();

        // 1: locks govern program variables only. The types enforce this; a
        // governed name that collides with a lock name is reported anyway.
        for (k, g) in interp.locks() {
            for v in g.governed() {
                if lock_names.contains(v.as_str()) {
                    out.push(DisciplineViolation {
                        restriction: 1,
                        locks: vec![k.to_string()],
                        vars: vec![v.to_string()],
                        message: format!("lock `{k}` governs `{v}`, which names a lock"),
                    });
                }
            }
        }
        // 2: lock variables are not control variables.
        for c in &self.cset {
            if lock_names.contains(c.as_str()) {
                out.push(DisciplineViolation {
                    restriction: 2,
                    locks: vec![c.to_string()],
                    vars: vec![c.to_string()],
                    message: format!("lock `{c}` is used as a control variable"),
                });
            }
        }
        // 3: lock variables are statically Low.
        for k in interp.lock_names() {
            if let Some(c) = self.vars.get(&Var::new(k.as_str())) {
                if *c != Classification::Static(Level::Low) {
                    out.push(DisciplineViolation {
                        restriction: 3,
                        locks: vec![k.to_string()],
                        vars: vec![k.to_string()],
                        message: format!("lock `{k}` is declared with a non-Low classification"),
                    });
                }
            }
        }
        // 4: a lock governs the same kind of access to a variable and all of
        // its control variables.
        for (v, cs) in &self.cvars {
            for c in cs {
                for (k, g) in interp.locks() {
                    let same_w = g.no_w.contains(c) == g.no_w.contains(v);
                    let same_rw = g.no_rw.contains(c) == g.no_rw.contains(v);
                    if !(same_w && same_rw) {
                        out.push(DisciplineViolation {
                            restriction: 4,
                            locks: vec![k.to_string()],
                            vars: vec![v.to_string(), c.to_string()],
                            message: format!("lock `{k}` governs `{v}` and its control variable `{c}` differently"),
                        });
                    }
                }
            }
        }
        // 5: each variable is managed by at most one lock.
        let mut owners: BTreeMap<&Var, Vec<&Lock>> = BTreeMap::new();
        for (k, g) in interp.locks() {
            let governed: BTreeSet<&Var> = g.governed().collect();
            for v in governed {
                owners.entry(v).or_default().push(k);
            }
        }
        for (v, ks) in owners {
            if ks.len() > 1 {
                out.push(DisciplineViolation {
                    restriction: 5,
                    locks: ks.iter().map(|k| k.to_string()).collect(),
                    vars: vec![v.to_string()],
                    message: format!("`{v}` is managed by more than one lock"),
                });
            }
        }
        // 6: no vacuous locks.
        for (k, g) in interp.locks() {
            if g.no_w.is_empty() && g.no_rw.is_empty() {
                out.push(DisciplineViolation {
                    restriction: 6,
                    locks: vec![k.to_string()],
                    vars: vec![],
                    message: format!("lock `{k}` governs no variables"),
                });
            }
        }
        // 7: no-write and no-read-write sets are disjoint.
        for (k, g) in interp.locks() {
            let both: Vec<String> = g.no_w.intersection(&g.no_rw).map(|v| v.to_string()).collect();
            if !both.is_empty() {
                out.push(DisciplineViolation {
                    restriction: 7,
                    locks: vec![k.to_string()],
                    vars: both.clone(),
                    message: format!("lock `{k}` lists {} under both no_w and no_rw", both.join(", ")),
                });
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum ClassRepr {
    Static(Level),
    Dep { control: Var, low_values: BTreeSet<Value> },
}

impl From<&Classification> for ClassRepr {
    fn from(c: &Classification) -> Self {
        match c {
            Classification::Static(l) => ClassRepr::Static(*l),
            Classification::ValueDep { control, low_values } => ClassRepr::Dep {
                control: control.clone(),
                low_values: low_values.clone(),
            },
        }
    }
}

/// On-disk policy file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyFile {
    variables: BTreeMap<Var, ClassRepr>,
    #[serde(default)]
    locks: LockInterp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domains: Option<BTreeMap<Var, Vec<Value>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    init: BTreeMap<Var, Value>,
}

impl PolicyFile {
    pub fn into_policy(self) -> Result<Policy, PolicyError> {
        let vars = self
            .variables
            .into_iter()
            .map(|(v, c)| {
                let c = match c {
                    ClassRepr::Static(l) => Classification::Static(l),
                    ClassRepr::Dep { control, low_values } => Classification::ValueDep { control, low_values },
                };
                (v, c)
            })
            .collect();
        let mut p = Policy::new(vars, self.locks)?;
        for v in self.domains.iter().flat_map(|d| d.keys()).chain(self.init.keys()) {
            if !p.is_declared(v) {
                return Err(PolicyError::UnknownVariable(v.to_string()));
            }
        }
        p.domains = self.domains;
        p.init = self.init;
        Ok(p)
    }
}

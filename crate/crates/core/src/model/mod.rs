//! Shared domain types: values, addresses, memory, mode state and the
//! classification policy, plus the observational-equivalence predicates
//! built on them.

mod modes;
mod policy;

pub use modes::{Mode, ModeState};
pub use policy::{
    Classification, DisciplineViolation, Level, LockGovernance, LockInterp, Policy, PolicyError, PolicyFile,
};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Machine value. Arithmetic wraps.
pub type Value = i64;

/// Value stored in a lock variable while it is held.
pub const LOCK_TRUE: Value = 1;
/// Value stored in a lock variable while it is free.
pub const LOCK_FALSE: Value = 0;

/// A lock variable is held iff its value is nonzero.
pub fn ev_lock(v: Value) -> bool {
    v != 0
}

macro_rules! ident_newtype {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(name: &str) -> Self {
                Self(Arc::from(name))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self::new(s)
            }
        }
    };
}

ident_newtype!(
    /// Program variable identifier.
    Var
);
ident_newtype!(
    /// Lock variable identifier.
    Lock
);

/// Shared-memory address. Lock primitives only touch `Lock` addresses.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Addr {
    Var(Var),
    Lock(Lock),
}

impl fmt::Display for Addr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Addr::Var(v) => write!(f, "{v}"),
            Addr::Lock(k) => write!(f, "lock {k}"),
        }
    }
}

/// Shared memory: a finite map that reads 0 at every unmapped address, so it
/// behaves as a total map.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Mem {
    vars: BTreeMap<Var, Value>,
    locks: BTreeMap<Lock, Value>,
}

impl Mem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(&self, v: &Var) -> Value {
        self.vars.get(v).copied().unwrap_or(0)
    }

    pub fn lock(&self, k: &Lock) -> Value {
        self.locks.get(k).copied().unwrap_or(0)
    }

    pub fn get(&self, a: &Addr) -> Value {
        match a {
            Addr::Var(v) => self.var(v),
            Addr::Lock(k) => self.lock(k),
        }
    }

    pub fn set_var(&mut self, v: &Var, value: Value) {
        if value == 0 {
            self.vars.remove(v);
        } else {
            self.vars.insert(v.clone(), value);
        }
    }

    pub fn set_lock(&mut self, k: &Lock, value: Value) {
        if value == 0 {
            self.locks.remove(k);
        } else {
            self.locks.insert(k.clone(), value);
        }
    }

    pub fn set(&mut self, a: &Addr, value: Value) {
        match a {
            Addr::Var(v) => self.set_var(v, value),
            Addr::Lock(k) => self.set_lock(k, value),
        }
    }

    pub fn with_var(mut self, v: &str, value: Value) -> Self {
        self.set_var(&Var::new(v), value);
        self
    }

    pub fn with_lock(mut self, k: &str, value: Value) -> Self {
        self.set_lock(&Lock::new(k), value);
        self
    }

    /// Program variables holding a nonzero value.
    pub fn nonzero_vars(&self) -> impl Iterator<Item = (&Var, Value)> {
        self.vars.iter().map(|(v, x)| (v, *x))
    }

    /// Lock variables holding a nonzero value.
    pub fn nonzero_locks(&self) -> impl Iterator<Item = (&Lock, Value)> {
        self.locks.iter().map(|(k, x)| (k, *x))
    }

    /// True iff no lock variable is held.
    pub fn no_locks_held(&self) -> bool {
        self.locks.values().all(|v| !ev_lock(*v))
    }

    /// Addresses at which the two memories disagree.
    pub fn diff(&self, other: &Mem) -> Vec<Addr> {
        let mut out = Vec::new();
        let vars: std::collections::BTreeSet<&Var> = self.vars.keys().chain(other.vars.keys()).collect();
        for v in vars {
            if self.var(v) != other.var(v) {
                out.push(Addr::Var(v.clone()));
            }
        }
        let locks: std::collections::BTreeSet<&Lock> = self.locks.keys().chain(other.locks.keys()).collect();
        for k in locks {
            if self.lock(k) != other.lock(k) {
                out.push(Addr::Lock(k.clone()));
            }
        }
        out
    }
}

impl fmt::Display for Mem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        for (v, x) in &self.vars {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{v}={x}")?;
        }
        for (k, x) in &self.locks {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "lock {k}={x}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for Mem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            vars: &'a BTreeMap<Var, Value>,
            locks: &'a BTreeMap<Lock, Value>,
        }
        Repr {
            vars: &self.vars,
            locks: &self.locks,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            #[serde(default)]
            vars: BTreeMap<Var, Value>,
            #[serde(default)]
            locks: BTreeMap<Lock, Value>,
        }
        let r = Repr::deserialize(d)?;
        let mut m = Mem::new();
        for (v, x) in r.vars {
            m.set_var(&v, x);
        }
        for (k, x) in r.locks {
            m.set_lock(&k, x);
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lock_constants() {
        assert!(ev_lock(LOCK_TRUE));
        assert!(!ev_lock(LOCK_FALSE));
    }

    #[test]
    fn memory_is_total_and_canonical() {
        let m = Mem::new().with_var("x", 3);
        assert_eq!(m.var(&Var::new("y")), 0);
        assert_eq!(m.var(&Var::new("x")), 3);
        let mut m2 = m.clone();
        m2.set_var(&Var::new("x"), 0);
        assert_eq!(m2, Mem::new());
    }

    #[test]
    fn var_and_lock_namespaces_are_disjoint() {
        let m = Mem::new().with_var("k", 5);
        assert_eq!(m.lock(&Lock::new("k")), 0);
        assert!(m.no_locks_held());
        assert!(!Mem::new().with_lock("k", 1).no_locks_held());
    }
}

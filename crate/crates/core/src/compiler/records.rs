use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::lang::Expr;
use crate::model::{LockGovernance, Mem, Mode, ModeState, Policy, Value, Var};
use crate::risc::Reg;

/// Register record: what each cached register is known to hold.
pub type RegRec = BTreeMap<Reg, Expr>;

/// Assumption record: the variables the thread currently assumes others will
/// not write, respectively not read or write.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AsmRec {
    pub no_w: BTreeSet<Var>,
    pub no_rw: BTreeSet<Var>,
}

impl AsmRec {
    pub fn acquire(&self, g: &LockGovernance) -> AsmRec {
        AsmRec {
            no_w: self.no_w.union(&g.no_w).cloned().collect(),
            no_rw: self.no_rw.union(&g.no_rw).cloned().collect(),
        }
    }

    pub fn release(&self, g: &LockGovernance) -> AsmRec {
        AsmRec {
            no_w: self.no_w.difference(&g.no_w).cloned().collect(),
            no_rw: self.no_rw.difference(&g.no_rw).cloned().collect(),
        }
    }

    fn covers(&self, v: &Var) -> bool {
        self.no_w.contains(v) || self.no_rw.contains(v)
    }
}

/// Compilation record: register record paired with assumption record.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CompRec {
    pub regrec: RegRec,
    pub asmrec: AsmRec,
}

impl CompRec {
    /// The empty record used to start a compilation.
    pub fn initial() -> Self {
        Self::default()
    }

    /// Entries both records agree on.
    pub fn meet_regrec(a: &RegRec, b: &RegRec) -> RegRec {
        a.iter()
            .filter(|(r, e)| b.get(r) == Some(e))
            .map(|(r, e)| (*r, e.clone()))
            .collect()
    }
}

impl fmt::Display for CompRec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (r, e)) in self.regrec.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "r{r}={e}")?;
        }
        let names = |s: &BTreeSet<Var>| s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        write!(
            f,
            "}} no_w={{{}}} no_rw={{{}}}",
            names(&self.asmrec.no_w),
            names(&self.asmrec.no_rw)
        )
    }
}

/// A variable is stable when it and all its control variables are covered by
/// the assumption record, so no other thread can change them.
pub fn var_stable(s: &AsmRec, policy: &Policy, v: &Var) -> bool {
    s.covers(v) && policy.cvars(v).iter().all(|c| s.covers(c))
}

/// Every variable mentioned by the register record is stable.
pub fn regrec_stable(rec: &CompRec, policy: &Policy) -> bool {
    rec.regrec
        .values()
        .all(|e| e.vars().iter().all(|v| var_stable(&rec.asmrec, policy, v)))
}

/// First register whose content disagrees with its recorded expression.
pub fn regrec_mem_inconsistency(regrec: &RegRec, regs: &[Value], mem: &Mem) -> Option<Reg> {
    regrec
        .iter()
        .find(|(r, e)| regs.get(**r as usize).copied() != Some(e.eval(mem)))
        .map(|(r, _)| *r)
}

pub fn regrec_mem_consistent(regrec: &RegRec, regs: &[Value], mem: &Mem) -> bool {
    regrec_mem_inconsistency(regrec, regs, mem).is_none()
}

/// The assumption record mirrors the mode state's assumptions exactly.
pub fn asmrec_mds_consistent(s: &AsmRec, mds: &ModeState) -> bool {
    &s.no_w == mds.get(Mode::AsmNoW) && &s.no_rw == mds.get(Mode::AsmNoRW)
}

pub fn compiled_config_consistent(rec: &CompRec, regs: &[Value], mds: &ModeState, mem: &Mem) -> bool {
    regrec_mem_consistent(&rec.regrec, regs, mem) && asmrec_mds_consistent(&rec.asmrec, mds)
}

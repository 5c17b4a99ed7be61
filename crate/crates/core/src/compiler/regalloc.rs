//! Register allocation over the register record. Neither function hands out
//! a register from the in-use set.

use std::collections::BTreeSet;

use super::records::RegRec;
use crate::lang::Expr;
use crate::model::Var;
use crate::risc::Reg;

/// Lowest register outside `in_use` already holding `v`.
pub fn reg_alloc_cached(regrec: &RegRec, in_use: &BTreeSet<Reg>, v: &Var) -> Option<Reg> {
    regrec
        .iter()
        .find(|(r, e)| !in_use.contains(r) && matches!(e, Expr::Var(x) if x == v))
        .map(|(r, _)| *r)
}

/// Lowest free register outside `in_use`, else the lowest mapped one (whose
/// entry the caller overwrites), else none.
pub fn reg_alloc(regrec: &RegRec, in_use: &BTreeSet<Reg>, registers: usize) -> Option<Reg> {
    let candidates = (0..registers as Reg).filter(|r| !in_use.contains(r));
    let mut first = None;
    for r in candidates {
        if !regrec.contains_key(&r) {
            return Some(r);
        }
        first.get_or_insert(r);
    }
    first
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cached_hit() {
        let rr = RegRec::from([(2, Expr::var("v"))]);
        assert_eq!(reg_alloc_cached(&rr, &BTreeSet::new(), &Var::new("v")), Some(2));
        assert_eq!(reg_alloc_cached(&rr, &BTreeSet::from([2]), &Var::new("v")), None);
        assert_eq!(reg_alloc_cached(&rr, &BTreeSet::new(), &Var::new("w")), None);
    }

    #[test]
    fn lowest_free_outside_in_use() {
        assert_eq!(reg_alloc(&RegRec::new(), &BTreeSet::from([0]), 8), Some(1));
    }

    #[test]
    fn prefers_unmapped_then_evicts() {
        let rr = RegRec::from([(0, Expr::Const(1)), (1, Expr::Const(2))]);
        assert_eq!(reg_alloc(&rr, &BTreeSet::new(), 3), Some(2));
        assert_eq!(reg_alloc(&rr, &BTreeSet::from([0]), 2), Some(1));
    }

    #[test]
    fn fails_when_exhausted() {
        assert_eq!(reg_alloc(&RegRec::new(), &BTreeSet::from([0, 1]), 2), None);
    }
}

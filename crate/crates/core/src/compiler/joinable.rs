//! Label hygiene between consecutively compiled fragments.

use std::collections::BTreeSet;

use crate::risc::{Instr, Label};

fn bound(p: &[(Option<Label>, Instr)]) -> BTreeSet<Label> {
    p.iter().filter_map(|(l, _)| *l).collect()
}

/// `p1` jumps only to its own labels or to the label of `p2`'s first
/// instruction.
pub fn joinable_fwd(p1: &[(Option<Label>, Instr)], p2: &[(Option<Label>, Instr)]) -> bool {
    let own = bound(p1);
    let entry = p2.first().and_then(|(l, _)| *l);
    p1.iter()
        .filter_map(|(_, i)| i.jump_target())
        .all(|t| own.contains(&t) || Some(t) == entry)
}

/// `p2` never jumps into `p1`.
pub fn joinable_bwd(p1: &[(Option<Label>, Instr)], p2: &[(Option<Label>, Instr)]) -> bool {
    let theirs = bound(p1);
    p2.iter()
        .filter_map(|(_, i)| i.jump_target())
        .all(|t| !theirs.contains(&t))
}

pub fn joinable(p1: &[(Option<Label>, Instr)], p2: &[(Option<Label>, Instr)]) -> bool {
    joinable_fwd(p1, p2) && joinable_bwd(p1, p2)
}

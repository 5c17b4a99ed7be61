use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Var;

/// Assume/guarantee access modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    AsmNoW,
    AsmNoRW,
    GuarNoW,
    GuarNoRW,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::AsmNoW, Mode::AsmNoRW, Mode::GuarNoW, Mode::GuarNoRW];

    fn index(self) -> usize {
        match self {
            Mode::AsmNoW => 0,
            Mode::AsmNoRW => 1,
            Mode::GuarNoW => 2,
            Mode::GuarNoRW => 3,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::AsmNoW => "AsmNoW",
            Mode::AsmNoRW => "AsmNoRW",
            Mode::GuarNoW => "GuarNoW",
            Mode::GuarNoRW => "GuarNoRW",
        };
        f.write_str(s)
    }
}

/// Per-thread ghost state mapping each mode to a set of program variables.
///
/// Lock variables cannot appear here: the sets are typed over [`Var`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeState {
    #[serde(rename = "AsmNoW")]
    asm_no_w: BTreeSet<Var>,
    #[serde(rename = "AsmNoRW")]
    asm_no_rw: BTreeSet<Var>,
    #[serde(rename = "GuarNoW")]
    guar_no_w: BTreeSet<Var>,
    #[serde(rename = "GuarNoRW")]
    guar_no_rw: BTreeSet<Var>,
}

impl ModeState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, m: Mode) -> &BTreeSet<Var> {
        match m.index() {
            0 => &self.asm_no_w,
            1 => &self.asm_no_rw,
            2 => &self.guar_no_w,
            _ => &self.guar_no_rw,
        }
    }

    pub fn get_mut(&mut self, m: Mode) -> &mut BTreeSet<Var> {
        match m.index() {
            0 => &mut self.asm_no_w,
            1 => &mut self.asm_no_rw,
            2 => &mut self.guar_no_w,
            _ => &mut self.guar_no_rw,
        }
    }

    pub fn contains(&self, m: Mode, x: &Var) -> bool {
        self.get(m).contains(x)
    }

    pub fn with(mut self, m: Mode, vars: &[&str]) -> Self {
        self.get_mut(m).extend(vars.iter().map(|v| Var::new(v)));
        self
    }

    /// Other threads are assumed not to read `x` unless it is in AsmNoRW.
    pub fn readable(&self, x: &Var) -> bool {
        !self.asm_no_rw.contains(x)
    }

    pub fn writable(&self, x: &Var) -> bool {
        !self.asm_no_w.contains(x) && !self.asm_no_rw.contains(x)
    }

    /// Every variable mentioned under any mode.
    pub fn mentioned(&self) -> BTreeSet<Var> {
        Mode::ALL.iter().flat_map(|m| self.get(*m).iter().cloned()).collect()
    }
}

impl fmt::Display for ModeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for m in Mode::ALL {
            let set = self.get(m);
            if set.is_empty() {
                continue;
            }
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{m}{{")?;
            for (i, v) in set.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str("}")?;
        }
        if first {
            f.write_str("{}")?;
        }
        Ok(())
    }
}

use std::fmt;

use crate::lang::BinOp;
use crate::model::{Lock, Value, Var};

pub type Reg = u32;
pub type Label = u32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Instr {
    Load(Reg, Var),
    Store(Var, Reg),
    Jmp(Label),
    /// Jump if the register holds zero.
    Jz(Label, Reg),
    Nop,
    MoveK(Reg, Value),
    MoveR(Reg, Reg),
    /// `Op(op, a, b)` stores `a op b` into `a`.
    Op(BinOp, Reg, Reg),
    LockAcq(Lock),
    LockRel(Lock),
}

impl Instr {
    pub fn jump_target(&self) -> Option<Label> {
        match self {
            Instr::Jmp(l) | Instr::Jz(l, _) => Some(*l),
            _ => None,
        }
    }

    pub fn registers(&self) -> Vec<Reg> {
        match self {
            Instr::Load(r, _) | Instr::Store(_, r) | Instr::Jz(_, r) | Instr::MoveK(r, _) => vec![*r],
            Instr::MoveR(a, b) | Instr::Op(_, a, b) => vec![*a, *b],
            _ => vec![],
        }
    }

    /// Parses one instruction; the flag reports a primed `nop'`.
    pub fn parse(text: &str) -> Result<(Instr, bool), String> {
        let toks: Vec<&str> = text.split_whitespace().collect();
        let reg = |s: &str| -> Result<Reg, String> {
            s.strip_prefix('r')
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| format!("bad register `{s}`"))
        };
        let label = |s: &str| -> Result<Label, String> {
            s.strip_prefix('L')
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| format!("bad label `{s}`"))
        };
        let ident = |s: &str| -> Result<String, String> {
            let ok = s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if ok {
                Ok(s.to_string())
            } else {
                Err(format!("bad identifier `{s}`"))
            }
        };
        let arity = |n: usize| -> Result<(), String> {
            if toks.len() == n + 1 {
                Ok(())
            } else {
                Err(format!("`{}` takes {n} operand(s)", toks[0]))
            }
        };
        let Some(op) = toks.first() else {
            return Err("empty instruction".into());
        };
        let instr = match *op {
            "load" => {
                arity(2)?;
                Instr::Load(reg(toks[1])?, Var::new(&ident(toks[2])?))
            }
            "store" => {
                arity(2)?;
                Instr::Store(Var::new(&ident(toks[1])?), reg(toks[2])?)
            }
            "jmp" => {
                arity(1)?;
                Instr::Jmp(label(toks[1])?)
            }
            "jz" => {
                arity(2)?;
                Instr::Jz(label(toks[1])?, reg(toks[2])?)
            }
            "nop" | "nop'" => {
                arity(0)?;
                return Ok((Instr::Nop, *op == "nop'"));
            }
            "movk" => {
                arity(2)?;
                let v = toks[2].parse().map_err(|_| format!("bad constant `{}`", toks[2]))?;
                Instr::MoveK(reg(toks[1])?, v)
            }
            "movr" => {
                arity(2)?;
                Instr::MoveR(reg(toks[1])?, reg(toks[2])?)
            }
            "op" => {
                arity(3)?;
                let bop = BinOp::from_symbol(toks[1]).ok_or_else(|| format!("unknown operator `{}`", toks[1]))?;
                Instr::Op(bop, reg(toks[2])?, reg(toks[3])?)
            }
            "acquire" => {
                arity(1)?;
                Instr::LockAcq(Lock::new(&ident(toks[1])?))
            }
            "release" => {
                arity(1)?;
                Instr::LockRel(Lock::new(&ident(toks[1])?))
            }
            other => return Err(format!("unknown mnemonic `{other}`")),
        };
        Ok((instr, false))
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Load(r, v) => write!(f, "load r{r} {v}"),
            Instr::Store(v, r) => write!(f, "store {v} r{r}"),
            Instr::Jmp(l) => write!(f, "jmp L{l}"),
            Instr::Jz(l, r) => write!(f, "jz L{l} r{r}"),
            Instr::Nop => write!(f, "nop"),
            Instr::MoveK(r, v) => write!(f, "movk r{r} {v}"),
            Instr::MoveR(a, b) => write!(f, "movr r{a} r{b}"),
            Instr::Op(op, a, b) => write!(f, "op {op} r{a} r{b}"),
            Instr::LockAcq(k) => write!(f, "acquire {k}"),
            Instr::LockRel(k) => write!(f, "release {k}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_parse_round_trip() {
        let all = [
            Instr::Load(0, Var::new("x")),
            Instr::Store(Var::new("y"), 3),
            Instr::Jmp(7),
            Instr::Jz(2, 1),
            Instr::Nop,
            Instr::MoveK(4, -12),
            Instr::MoveR(1, 2),
            Instr::Op(BinOp::Le, 0, 1),
            Instr::LockAcq(Lock::new("k")),
            Instr::LockRel(Lock::new("k")),
        ];
        for i in all {
            assert_eq!(Instr::parse(&i.to_string()).unwrap(), (i, false));
        }
        assert_eq!(Instr::parse("nop'").unwrap(), (Instr::Nop, true));
    }

    #[test]
    fn parse_errors() {
        assert!(Instr::parse("load x r0").is_err());
        assert!(Instr::parse("jmp 3").is_err());
        assert!(Instr::parse("op % r0 r1").is_err());
        assert!(Instr::parse("halt").is_err());
        assert!(Instr::parse("nop r0").is_err());
    }
}

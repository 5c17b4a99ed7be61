//! Canonical concrete syntax. For right-nested sequences the output parses
//! back to the same tree.

use std::fmt::{self, Write};

use super::ast::{Cmd, Expr};

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

fn write_expr(f: &mut impl Write, e: &Expr, min_prec: u8) -> fmt::Result {
    match e {
        Expr::Const(n) => write!(f, "{n}"),
        Expr::Var(v) => write!(f, "{v}"),
        Expr::BinOp(op, a, b) => {
            let p = op.precedence();
            let paren = p < min_prec;
            if paren {
                f.write_char('(')?;
            }
            write_expr(f, a, p)?;
            write!(f, " {op} ")?;
            write_expr(f, b, p + 1)?;
            if paren {
                f.write_char(')')?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Cmd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if f.alternate() {
            write_inline(f, self)
        } else {
            write_cmd(f, self, 0)
        }
    }
}

fn indent(f: &mut impl Write, depth: usize) -> fmt::Result {
    for _ in 0..depth {
        f.write_str("  ")?;
    }
    Ok(())
}

fn write_cmd(f: &mut impl Write, c: &Cmd, depth: usize) -> fmt::Result {
    match c {
        Cmd::Seq(a, b) => {
            write_cmd(f, a, depth)?;
            f.write_str(";\n")?;
            write_cmd(f, b, depth)
        }
        Cmd::If(e, a, b) => {
            indent(f, depth)?;
            writeln!(f, "if {e} then")?;
            write_cmd(f, a, depth + 1)?;
            f.write_char('\n')?;
            indent(f, depth)?;
            f.write_str("else\n")?;
            write_cmd(f, b, depth + 1)?;
            f.write_char('\n')?;
            indent(f, depth)?;
            f.write_str("fi")
        }
        Cmd::While(e, body) => {
            indent(f, depth)?;
            writeln!(f, "while {e} do")?;
            write_cmd(f, body, depth + 1)?;
            f.write_char('\n')?;
            indent(f, depth)?;
            f.write_str("od")
        }
        other => {
            indent(f, depth)?;
            write_inline(f, other)
        }
    }
}

/// Single-line rendering, used in traces (`{:#}`).
fn write_inline(f: &mut impl Write, c: &Cmd) -> fmt::Result {
    match c {
        Cmd::Skip => f.write_str("skip"),
        Cmd::Stop => f.write_str("stop"),
        Cmd::Assign(v, e) => write!(f, "{v} := {e}"),
        Cmd::LockAcq(k) => write!(f, "acquire({k})"),
        Cmd::LockRel(k) => write!(f, "release({k})"),
        Cmd::Seq(a, b) => {
            write_inline(f, a)?;
            f.write_str("; ")?;
            write_inline(f, b)
        }
        Cmd::If(e, a, b) => {
            write!(f, "if {e} then ")?;
            write_inline(f, a)?;
            f.write_str(" else ")?;
            write_inline(f, b)?;
            f.write_str(" fi")
        }
        Cmd::While(e, body) => {
            write!(f, "while {e} do ")?;
            write_inline(f, body)?;
            f.write_str(" od")
        }
    }
}

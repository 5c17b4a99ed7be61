use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::model::{Lock, Mem, Value, Var};

/// Binary operators. Predicates yield 1 or 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    And,
    Or,
}

impl BinOp {
    pub const ALL: [BinOp; 9] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::Lt,
        BinOp::Le,
        BinOp::And,
        BinOp::Or,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        BinOp::ALL.into_iter().find(|op| op.symbol() == s)
    }

    /// Binding strength; higher binds tighter. All operators are left
    /// associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul => 6,
        }
    }

    pub fn apply(self, a: Value, b: Value) -> Value {
        let bool_val = |p: bool| p as Value;
        match self {
            BinOp::Add => a.wrapping_add(b),
            BinOp::Sub => a.wrapping_sub(b),
            BinOp::Mul => a.wrapping_mul(b),
            BinOp::Eq => bool_val(a == b),
            BinOp::Ne => bool_val(a != b),
            BinOp::Lt => bool_val(a < b),
            BinOp::Le => bool_val(a <= b),
            BinOp::And => bool_val(a != 0 && b != 0),
            BinOp::Or => bool_val(a != 0 || b != 0),
        }
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Value),
    Var(Var),
    BinOp(BinOp, Arc<Expr>, Arc<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(Var::new(name))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::BinOp(op, Arc::new(a), Arc::new(b))
    }

    /// Expression evaluation. Total and deterministic.
    pub fn eval(&self, mem: &Mem) -> Value {
        match self {
            Expr::Const(n) => *n,
            Expr::Var(v) => mem.var(v),
            Expr::BinOp(op, a, b) => op.apply(a.eval(mem), b.eval(mem)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::BinOp(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn mentions(&self, v: &Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(x) => x == v,
            Expr::BinOp(_, a, b) => a.mentions(v) || b.mentions(v),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::BinOp(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

/// Commands. `Stop` never appears in parsed source.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Cmd {
    Skip,
    Seq(Arc<Cmd>, Arc<Cmd>),
    If(Expr, Arc<Cmd>, Arc<Cmd>),
    While(Expr, Arc<Cmd>),
    Assign(Var, Expr),
    LockAcq(Lock),
    LockRel(Lock),
    Stop,
}

impl Cmd {
    pub fn seq(a: Cmd, b: Cmd) -> Cmd {
        Cmd::Seq(Arc::new(a), Arc::new(b))
    }

    /// Right-nested sequence of the given commands; `Skip` when empty.
    pub fn seq_all(cmds: impl IntoIterator<Item = Cmd>) -> Cmd {
        let mut v: Vec<Cmd> = cmds.into_iter().collect();
        let Some(mut acc) = v.pop() else {
            return Cmd::Skip;
        };
        while let Some(c) = v.pop() {
            acc = Cmd::seq(c, acc);
        }
        acc
    }

    pub fn if_(e: Expr, a: Cmd, b: Cmd) -> Cmd {
        Cmd::If(e, Arc::new(a), Arc::new(b))
    }

    pub fn while_(e: Expr, body: Cmd) -> Cmd {
        Cmd::While(e, Arc::new(body))
    }

    pub fn assign(v: &str, e: Expr) -> Cmd {
        Cmd::Assign(Var::new(v), e)
    }

    pub fn acquire(k: &str) -> Cmd {
        Cmd::LockAcq(Lock::new(k))
    }

    pub fn release(k: &str) -> Cmd {
        Cmd::LockRel(Lock::new(k))
    }

    pub fn is_stop(&self) -> bool {
        matches!(self, Cmd::Stop)
    }

    pub fn contains_stop(&self) -> bool {
        match self {
            Cmd::Stop => true,
            Cmd::Seq(a, b) | Cmd::If(_, a, b) => a.contains_stop() || b.contains_stop(),
            Cmd::While(_, c) => c.contains_stop(),
            _ => false,
        }
    }

    /// Every program variable read or written anywhere in the command.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit(&mut |c| match c {
            Cmd::If(e, _, _) | Cmd::While(e, _) => out.extend(e.vars()),
            Cmd::Assign(v, e) => {
                out.insert(v.clone());
                out.extend(e.vars());
            }
            _ => {}
        });
        out
    }

    pub fn locks(&self) -> BTreeSet<Lock> {
        let mut out = BTreeSet::new();
        self.visit(&mut |c| {
            if let Cmd::LockAcq(k) | Cmd::LockRel(k) = c {
                out.insert(k.clone());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Cmd)) {
        f(self);
        match self {
            Cmd::Seq(a, b) | Cmd::If(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Cmd::While(_, c) => c.visit(f),
            _ => {}
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

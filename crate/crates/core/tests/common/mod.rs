//! Seeded generators shared by the property tests and the acceptance run.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use mixsec::compiler::{compile_expr, AsmRec, CompRec, CompileCtx};
use mixsec::lang::{BinOp, Cmd, Expr};
use mixsec::model::{LockInterp, Mem, ModeState, Policy, Value, Var};
use mixsec::risc::{RiscProgram, RiscState, DEFAULT_REGISTERS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Variables guarded by `shared_lock` (write exclusion) and `secret_lock`
/// (read-write exclusion), plus an ungoverned write-only sink.
pub const SHARED: [&str; 4] = ["a", "b", "c", "d"];
pub const SECRET: [&str; 1] = ["h"];
pub const SINK: &str = "out";

pub fn gen_policy() -> Policy {
    let interp = LockInterp::new()
        .with_lock("shared_lock", &SHARED, &[])
        .with_lock("secret_lock", &[], &SECRET);
    Policy::from_spec(
        &[
            ("a", "low"),
            ("b", "low"),
            ("c", "low"),
            ("d", "dep:c=0"),
            ("h", "high"),
            ("out", "low"),
        ],
        interp,
    )
    .expect("generator policy is well formed")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random expression of depth at most `depth` over `vars`.
pub fn gen_expr(rng: &mut impl Rng, depth: usize, vars: &[&str]) -> Expr {
    let leaf = depth <= 1 || rng.random_bool(0.3);
    if leaf {
        if vars.is_empty() || rng.random_bool(0.35) {
            Expr::Const(rng.random_range(-2..=3))
        } else {
            Expr::var(vars[rng.random_range(0..vars.len())])
        }
    } else {
        let op = BinOp::ALL[rng.random_range(0..BinOp::ALL.len())];
        Expr::bin(op, gen_expr(rng, depth - 1, vars), gen_expr(rng, depth - 1, vars))
    }
}

struct Scope {
    shared: bool,
    secret: bool,
}

impl Scope {
    fn readable(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.shared {
            v.extend(SHARED);
        }
        if self.secret {
            v.extend(SECRET);
        }
        v
    }
}

fn gen_body(rng: &mut impl Rng, scope: &mut Scope, fuel: usize) -> Cmd {
    let n = rng.random_range(1..=3);
    Cmd::seq_all((0..n).map(|_| gen_stmt(rng, scope, fuel)))
}

fn gen_stmt(rng: &mut impl Rng, scope: &mut Scope, fuel: usize) -> Cmd {
    let readable = scope.readable();
    let mut writable = readable.clone();
    writable.push(SINK);
    let choice = if fuel == 0 {
        rng.random_range(0..2)
    } else {
        rng.random_range(0..6)
    };
    match choice {
        0 => Cmd::Skip,
        1 => {
            let v = writable[rng.random_range(0..writable.len())];
            // Only low-readable values flow to the sink.
            let vars: Vec<&str> = if v == SINK || SHARED.contains(&v) {
                readable.iter().copied().filter(|x| !SECRET.contains(x)).collect()
            } else {
                readable.clone()
            };
            Cmd::assign(v, gen_expr(rng, 3, &vars))
        }
        2 | 3 => Cmd::if_(
            gen_expr(rng, 2, &readable),
            gen_body(rng, scope, fuel - 1),
            gen_body(rng, scope, fuel - 1),
        ),
        4 => Cmd::while_(gen_expr(rng, 2, &readable), gen_body(rng, scope, fuel - 1)),
        _ => gen_region(rng, scope, fuel - 1),
    }
}

fn gen_region(rng: &mut impl Rng, scope: &mut Scope, fuel: usize) -> Cmd {
    let lock = match (scope.shared, scope.secret) {
        (false, false) => {
            if rng.random_bool(0.7) {
                "shared_lock"
            } else {
                "secret_lock"
            }
        }
        (false, true) => "shared_lock",
        (true, false) => "secret_lock",
        (true, true) => return Cmd::Skip,
    };
    let flag = if lock == "shared_lock" {
        &mut scope.shared
    } else {
        &mut scope.secret
    };
    *flag = true;
    let body = gen_body(rng, scope, fuel);
    if lock == "shared_lock" {
        scope.shared = false;
    } else {
        scope.secret = false;
    }
    Cmd::seq_all([Cmd::acquire(lock), body, Cmd::release(lock)])
}

/// A program that passes the stability checks under [`gen_policy`]: every
/// read happens inside a lock region covering the variable, and regions are
/// balanced.
pub fn gen_program(rng: &mut impl Rng, fuel: usize) -> Cmd {
    let mut scope = Scope {
        shared: false,
        secret: false,
    };
    let n = rng.random_range(1..=3);
    Cmd::seq_all((0..n).map(|_| {
        if rng.random_bool(0.8) {
            gen_region(rng, &mut scope, fuel)
        } else {
            Cmd::assign(SINK, Expr::Const(rng.random_range(0..3)))
        }
    }))
}

/// Memory over the generator variables with values in `-1..=2`.
pub fn gen_mem(rng: &mut impl Rng) -> Mem {
    let mut m = Mem::new();
    for v in SHARED.iter().chain(SECRET.iter()).chain([SINK].iter()) {
        m.set_var(&Var::new(v), rng.random_range(-1..=2));
    }
    m
}

/// Compiles `e` against a record in which every variable of `policy` is
/// stable, runs the emitted code on `mem` and returns the value of the result
/// register together with the record entry for it.
pub fn run_compiled_expr(policy: &Policy, e: &Expr, mem: &Mem) -> (Value, Option<Expr>) {
    let all: BTreeSet<Var> = policy.var_names().cloned().collect();
    let rec = CompRec {
        regrec: Default::default(),
        asmrec: AsmRec {
            no_w: all,
            no_rw: BTreeSet::new(),
        },
    };
    let out = compile_expr(
        CompileCtx::new(policy, DEFAULT_REGISTERS),
        &rec,
        &BTreeSet::new(),
        None,
        e,
    )
    .expect("stable expression compiles");
    let prog = RiscProgram::from_instrs(out.code.iter().map(|a| a.instr.clone()).collect());
    let mut st = RiscState::new(std::sync::Arc::new(prog), DEFAULT_REGISTERS);
    let mut mds = ModeState::new();
    let mut m = mem.clone();
    let interp = policy.interp().clone();
    while !st.stopped() {
        st.step(&mut mds, &mut m, &interp).expect("expression code steps");
    }
    (
        st.reg(out.reg).expect("result register"),
        out.rec.regrec.get(&out.reg).cloned(),
    )
}

/// Policy over three low variables governed by one lock, used by the
/// expression oracle.
pub fn expr_policy() -> Policy {
    Policy::from_spec(
        &[("x", "low"), ("y", "low"), ("z", "low")],
        LockInterp::new().with_lock("xyz_lock", &["x", "y", "z"], &[]),
    )
    .expect("expression policy is well formed")
}

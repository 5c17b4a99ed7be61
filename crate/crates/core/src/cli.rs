//! Command-line front end: `compile`, `run`, `verify` and `corpus`.
//!
//! Exit codes: 0 success or all checks ok, 1 compilation rejected or a check
//! violated, 2 usage, I/O or parse errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::compiler::{compile, AnnotatedJson};
use crate::corpus::{check_expectations, load_policy, load_program, verify, CheckKind, Entry, VerifyOptions};
use crate::harness::{random_schedules, with_jobs, CheckReport, GlobalConf, ThreadState};
use crate::model::{Addr, Mode, ModeState, Policy, Value, Var};
use crate::risc::{RiscProgram, RiscState, DEFAULT_REGISTERS};

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (format 1)");

#[derive(Parser, Debug)]
#[command(name = "mixsec", version = VERSION, about = "Secure compiler and noninterference checkers for a lock-synchronised While language")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile a While program to an assembly listing and annotated JSON.
    Compile {
        src: PathBuf,
        #[arg(long)]
        policy: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_REGISTERS)]
        registers: usize,
    },
    /// Execute a program or corpus entry under a schedule and print a trace.
    Run {
        /// A `.wl` file, a `.risc` listing or a corpus entry directory.
        prog: PathBuf,
        /// Required unless `prog` is a corpus entry.
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Comma-separated thread indices.
        #[arg(long, conflicts_with = "seed")]
        schedule: Option<String>,
        /// Seed for a random schedule of `--steps` steps.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Which level to run a corpus entry at.
        #[arg(long, value_enum, default_value_t = Level::While)]
        level: Level,
        #[arg(long, default_value_t = DEFAULT_REGISTERS)]
        registers: usize,
        /// Initial values, `x=3`, repeatable.
        #[arg(long = "set", value_parser = parse_assignment)]
        init: Vec<(Var, Value)>,
    },
    /// Run bounded checks on a corpus entry.
    Verify(VerifyArgs),
    /// Check every entry under a directory against its manifest.
    Corpus {
        #[arg(default_value = "corpus")]
        dir: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Level {
    While,
    Risc,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    entry: PathBuf,
    #[arg(long)]
    all: bool,
    #[arg(long)]
    discipline: bool,
    #[arg(long)]
    refine: bool,
    #[arg(long)]
    decomp: bool,
    #[arg(long)]
    nohb: bool,
    #[arg(long)]
    local: bool,
    #[arg(long)]
    global: bool,
    #[arg(long)]
    hyper: bool,
    /// Check by name, repeatable.
    #[arg(long = "check")]
    checks: Vec<String>,
    /// Step bound per run (manifest default otherwise).
    #[arg(long)]
    steps: Option<usize>,
    /// Schedule length (exhaustive depth or random length).
    #[arg(long)]
    sched_len: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Enumeration domain override, `v=0,1`, repeatable.
    #[arg(long = "domain", value_parser = parse_domain)]
    domains: Vec<(Var, Vec<Value>)>,
    /// Write the reports as a JSON array to this file.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    registers: Option<usize>,
    #[arg(long)]
    init_mems: Option<usize>,
    /// Worker threads for the checkers.
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_assignment(s: &str) -> Result<(Var, Value), String> {
    let (v, x) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    Ok((Var::new(v.trim()), x.trim().parse().map_err(|e| format!("{e}"))?))
}

fn parse_domain(s: &str) -> Result<(Var, Vec<Value>), String> {
    let (v, xs) = s.split_once('=').ok_or("expected NAME=V1,V2,...")?;
    let values = xs
        .split(',')
        .map(|x| x.trim().parse::<Value>().map_err(|e| format!("{e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("empty domain".into());
    }
    Ok((Var::new(v.trim()), values))
}

/// Failure of a command: message and exit code.
struct Failure(i32, String);

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure(2, msg.to_string())
}

pub fn main() -> i32 {
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    run(std::env::args_os(), &mut out, &mut err)
}

/// Parses `args` (including the program name) and executes the command.
pub fn run(
    args: impl IntoIterator<Item = impl Into<OsString> + Clone>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Compile {
            src,
            policy,
            out_dir,
            registers,
        } => cmd_compile(&src, &policy, &out_dir, registers, out),
        Command::Run {
            prog,
            policy,
            schedule,
            seed,
            steps,
            level,
            registers,
            init,
        } => cmd_run(
            &prog,
            policy.as_deref(),
            schedule.as_deref(),
            seed,
            steps,
            level,
            registers,
            &init,
            out,
        ),
        Command::Verify(args) => cmd_verify(args, out),
        Command::Corpus { dir, jobs } => cmd_corpus(&dir, jobs, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn cmd_compile(
    src: &Path,
    policy: &Path,
    out_dir: &Path,
    registers: usize,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let policy = load_policy(policy).map_err(usage)?;
    let cmd = load_program(src).map_err(usage)?;
    let compiled = match compile(&cmd, &policy, registers) {
        Ok(c) => c,
        Err(e) => return Err(Failure(1, format!("{}: compilation rejected: {e}", src.display()))),
    };
    fs::create_dir_all(out_dir).map_err(|e| usage(format!("{}: {e}", out_dir.display())))?;
    let stem = src.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let listing = out_dir.join(format!("{stem}.risc"));
    let json = out_dir.join(format!("{stem}.json"));
    write_file(&listing, &compiled.program.listing())?;
    write_file(
        &json,
        &AnnotatedJson::from_output(&compiled.output, registers).to_json_string(),
    )?;
    let _ = writeln!(
        out,
        "compiled {} ({} instructions) -> {}, {}",
        src.display(),
        compiled.program.len(),
        listing.display(),
        json.display()
    );
    Ok(0)
}

fn load_thread(path: &Path, policy: &Policy, level: Level, registers: usize) -> Result<ThreadState, Failure> {
    if path.extension().is_some_and(|e| e == "risc") {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let prog = RiscProgram::parse_listing(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        return Ok(ThreadState::Risc(RiscState::new(Arc::new(prog), registers)));
    }
    let cmd = load_program(path).map_err(usage)?;
    match level {
        Level::While => Ok(ThreadState::While(cmd)),
        Level::Risc => compile(&cmd, policy, registers)
            .map(|c| ThreadState::Risc(RiscState::new(c.program, registers)))
            .map_err(|e| Failure(1, format!("{}: compilation rejected: {e}", path.display()))),
    }
}

fn mode_delta(before: &ModeState, after: &ModeState) -> String {
    let mut parts = Vec::new();
    for m in Mode::ALL {
        for v in after.get(m).difference(before.get(m)) {
            parts.push(format!("+{m}({v})"));
        }
        for v in before.get(m).difference(after.get(m)) {
            parts.push(format!("-{m}({v})"));
        }
    }
    parts.join(" ")
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    prog: &Path,
    policy: Option<&Path>,
    schedule: Option<&str>,
    seed: Option<u64>,
    steps: usize,
    level: Level,
    registers: usize,
    init: &[(Var, Value)],
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let (policy, threads) = if prog.is_dir() {
        let entry = Entry::load(prog).map_err(usage)?;
        let mut threads = Vec::new();
        for (name, _) in &entry.threads {
            threads.push(load_thread(&entry.dir.join(name), &entry.policy, level, registers)?);
        }
        (entry.policy, threads)
    } else {
        let path = policy.ok_or_else(|| usage("--policy is required for a single program"))?;
        let policy = load_policy(path).map_err(usage)?;
        let t = load_thread(prog, &policy, level, registers)?;
        (policy, vec![t])
    };
    let n = threads.len();
    let schedule: Vec<usize> = match (schedule, seed) {
        (Some(s), _) => s
            .split(',')
            .filter(|x| !x.trim().is_empty())
            .map(|x| {
                x.trim()
                    .parse::<usize>()
                    .map_err(|e| usage(format!("schedule entry `{x}`: {e}")))
            })
            .collect::<Result<_, _>>()?,
        (None, Some(seed)) => random_schedules(n, n + 1, steps, seed).pop().unwrap_or_default(),
        (None, None) => vec![0; steps],
    };
    if let Some(bad) = schedule.iter().find(|&&t| t >= n) {
        return Err(usage(format!(
            "schedule names thread {bad} but the system has {n} thread(s)"
        )));
    }
    let mut mem = crate::model::Mem::new();
    for (v, x) in init {
        if !policy.is_declared(v) {
            return Err(usage(format!("--set: undeclared variable `{v}`")));
        }
        mem.set_var(v, *x);
    }
    let mut g = GlobalConf::new(threads, mem, policy.interp());
    let interp = policy.interp();
    let _ = writeln!(out, "initial memory: {}", g.mem);
    for (step, &t) in schedule.iter().enumerate() {
        let before_mem = g.mem.clone();
        let before_mds = g.threads[t].mds.clone();
        let what = g.threads[t].state.to_string();
        let info = g.step(t, interp).map_err(usage)?;
        let mut line = format!("{step:>4} t{t}: {what}");
        if info.is_none() {
            line.push_str("  (stopped)");
        }
        let writes: Vec<String> = before_mem
            .diff(&g.mem)
            .iter()
            .map(|a: &Addr| format!("{a}={}", g.mem.get(a)))
            .collect();
        if !writes.is_empty() {
            line.push_str(&format!("  | {}", writes.join(", ")));
        }
        let delta = mode_delta(&before_mds, &g.threads[t].mds);
        if !delta.is_empty() {
            line.push_str(&format!("  | {delta}"));
        }
        let _ = writeln!(out, "{line}");
        if g.all_stopped() {
            break;
        }
    }
    let _ = writeln!(out, "final memory: {}", g.mem);
    Ok(0)
}

fn selected_checks(a: &VerifyArgs) -> Result<Vec<CheckKind>, Failure> {
    let mut ks = Vec::new();
    let flags = [
        (a.discipline, CheckKind::Discipline),
        (a.refine, CheckKind::Refine),
        (a.decomp, CheckKind::Decomp),
        (a.nohb, CheckKind::Nohb),
        (a.local, CheckKind::Local),
        (a.global, CheckKind::Global),
        (a.hyper, CheckKind::Hyper),
    ];
    if a.all {
        ks.extend(CheckKind::ALL);
    }
    ks.extend(flags.iter().filter(|(on, _)| *on).map(|(_, k)| *k));
    for name in &a.checks {
        ks.push(name.parse::<CheckKind>().map_err(usage)?);
    }
    if ks.is_empty() {
        return Err(usage("no checks selected (use --all or a check flag)"));
    }
    Ok(ks)
}

fn print_reports(reports: &[CheckReport], out: &mut dyn Write) {
    for r in reports {
        let _ = writeln!(out, "{}", r.summary());
    }
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let checks = selected_checks(&a)?;
    let mut entry = Entry::load(&a.entry).map_err(usage)?;
    for (v, xs) in &a.domains {
        entry.policy = entry.policy.clone().override_domain(v, xs.clone()).map_err(usage)?;
    }
    let opts = VerifyOptions {
        max_steps: a.steps,
        sched_len: a.sched_len,
        seed: a.seed,
        init_mems: a.init_mems,
        registers: a.registers,
        schedules: None,
    };
    let reports = match with_jobs(a.jobs, || verify(&entry, &checks, &opts)) {
        Ok(r) => r,
        Err(crate::corpus::VerifyError::Compile(e)) => {
            return Err(Failure(1, format!("{}: compilation rejected: {e}", entry.name())))
        }
        Err(e) => return Err(usage(e)),
    };
    print_reports(&reports, out);
    if let Some(path) = &a.json {
        let text = serde_json::to_string_pretty(&reports).map_err(usage)?;
        write_file(path, &text)?;
    }
    Ok(if reports.iter().all(CheckReport::is_ok) { 0 } else { 1 })
}

fn cmd_corpus(dir: &Path, jobs: Option<usize>, out: &mut dyn Write) -> Result<i32, Failure> {
    let entries = crate::corpus::load_corpus(dir).map_err(usage)?;
    let mut failed = 0;
    for e in &entries {
        let compiled = e.compile(DEFAULT_REGISTERS);
        let line = match (e.expects_accept(), compiled) {
            (true, Err(err)) => {
                failed += 1;
                format!("FAIL {}: expected to compile, rejected: {err}", e.name())
            }
            (false, Ok(_)) => {
                failed += 1;
                format!("FAIL {}: expected rejection, compiled", e.name())
            }
            (false, Err(err)) => {
                let want_stability = e.manifest.compile.reason.as_deref() == Some("stability");
                if want_stability && !err.error.is_stability() {
                    failed += 1;
                    format!("FAIL {}: rejected for the wrong reason: {err}", e.name())
                } else {
                    format!("ok   {}: rejected ({err})", e.name())
                }
            }
            (true, Ok(_)) => {
                let reports =
                    with_jobs(jobs, || verify(e, &CheckKind::ALL, &VerifyOptions::default())).map_err(usage)?;
                let mismatches = check_expectations(e, &reports);
                if mismatches.is_empty() {
                    let verdicts: Vec<String> = reports
                        .iter()
                        .map(|r| match &r.level {
                            Some(l) => format!("{}[{l}]={}", r.check, r.verdict),
                            None => format!("{}={}", r.check, r.verdict),
                        })
                        .collect();
                    format!("ok   {}: {}", e.name(), verdicts.join(" "))
                } else {
                    failed += 1;
                    let m: Vec<String> = mismatches.iter().map(|m| m.to_string()).collect();
                    format!("FAIL {}: {}", e.name(), m.join("; "))
                }
            }
        };
        let _ = writeln!(out, "{line}");
    }
    let _ = writeln!(out, "{} entries, {failed} failed", entries.len());
    Ok(if failed == 0 { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["mixsec"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn version_mentions_format() {
        let (code, out, _) = run_args(&["--version"]);
        assert_eq!(code, 0);
        assert!(out.contains(&format!("format {}", crate::FORMAT_VERSION)), "{out}");
    }

    #[test]
    fn parse_domain_flag() {
        assert_eq!(parse_domain("x=0,1").unwrap(), (Var::new("x"), vec![0, 1]));
        assert!(parse_domain("x").is_err());
        assert!(parse_domain("x=a").is_err());
    }

    #[test]
    fn no_checks_is_usage_error() {
        let (code, _, err) = run_args(&["verify", "/nonexistent"]);
        assert_eq!(code, 2);
        assert!(err.contains("no checks"), "{err}");
    }
}

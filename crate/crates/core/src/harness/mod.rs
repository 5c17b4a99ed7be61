//! Bounded dynamic checkers for compiled and source systems.
//!
//! Every check explores a finite set of initial memories and schedules and
//! returns a [`CheckReport`]. An `ok` verdict is evidence within the stated
//! bounds, not a proof.

use thiserror::Error;

pub mod compat;
pub mod compliance;
pub mod decomposed;
pub mod enumerate;
pub mod havoc;
pub mod hyper;
pub mod nohb;
pub mod pacing;
pub mod refinement;
pub mod report;
pub mod system;

pub use compat::{check_global_compat, compat_violation};
pub use compliance::{check_local_compliance, footprint_violation, ComplianceBounds};
pub use decomposed::{check_decomposed, DecompInput};
pub use enumerate::{explore, low_eq_pairs, random_memories, random_schedules, Exploration, Finding, ScheduleSpec};
pub use havoc::{havoc_identical, havoc_low_eq, HavocConfig, HavocKind};
pub use hyper::{check_system_security, secure_violation};
pub use nohb::check_no_high_branching;
pub use pacing::abs_steps;
pub use refinement::{check_refinement, RefinementInput};
pub use report::{CheckReport, Counterexample, Verdict};
pub use system::{GlobalConf, Thread, ThreadState};

use crate::lang::StepError;
use crate::risc::RiscError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Risc(#[from] RiscError),
    #[error("thread index {index} out of range ({threads} threads)")]
    BadThread { index: usize, threads: usize },
    #[error("{0}")]
    Input(String),
}

/// Runs `f` on a pool of `jobs` worker threads (the global pool when `None`).
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("worker pool")
            .install(f),
        None => f(),
    }
}

//! Example systems on disk: one directory per entry holding the thread
//! sources (`.wl`), a policy file and a `manifest.json` with expected
//! verdicts and bounds.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::compiler::{compile, CompileError, Compiled};
use crate::lang::{parse_cmd, Cmd, ParseError};
use crate::model::{DisciplineViolation, Policy, PolicyError};

mod manifest;
mod verify;

pub use manifest::{Bounds, CompileExpect, CompileSpec, Manifest, ScheduleBounds};
pub use verify::{
    check_expectations, initial_memories, verify, CheckKind, Mismatch, UnknownCheck, VerifyError, VerifyOptions,
};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed manifest: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Policy {
        path: PathBuf,
        #[source]
        source: PolicyError,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("{path}: locking discipline violated:\n  {}", render(.violations))]
    Discipline {
        path: PathBuf,
        violations: Vec<DisciplineViolation>,
    },
}

fn render(v: &[DisciplineViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("\n  ")
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads and validates a policy file, rejecting discipline violations.
pub fn load_policy(path: &Path) -> Result<Policy, CorpusError> {
    let policy = Policy::from_json(&read(path)?).map_err(|source| CorpusError::Policy {
        path: path.to_path_buf(),
        source,
    })?;
    let violations = policy.check_lock_discipline();
    if !violations.is_empty() {
        return Err(CorpusError::Discipline {
            path: path.to_path_buf(),
            violations,
        });
    }
    Ok(policy)
}

pub fn load_program(path: &Path) -> Result<Cmd, CorpusError> {
    parse_cmd(&read(path)?).map_err(|source| CorpusError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Compilation failure of one thread of an entry.
#[derive(Debug, Error)]
#[error("{thread}: {error}")]
pub struct ThreadCompileError {
    pub thread: String,
    pub error: CompileError,
}

/// A parsed, policy-validated corpus entry.
#[derive(Clone, Debug)]
pub struct Entry {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub policy: Policy,
    /// Thread file names and their parsed programs, in manifest order.
    pub threads: Vec<(String, Cmd)>,
}

impl Entry {
    pub fn load(dir: &Path) -> Result<Entry, CorpusError> {
        let mpath = dir.join("manifest.json");
        let manifest: Manifest = serde_json::from_str(&read(&mpath)?).map_err(|source| CorpusError::Manifest {
            path: mpath.clone(),
            source,
        })?;
        let policy = load_policy(&dir.join(&manifest.policy))?;
        let threads = manifest
            .threads
            .iter()
            .map(|t| Ok((t.clone(), load_program(&dir.join(t))?)))
            .collect::<Result<_, CorpusError>>()?;
        Ok(Entry {
            dir: dir.to_path_buf(),
            manifest,
            policy,
            threads,
        })
    }

    pub fn name(&self) -> &str {
        &self.manifest.name
    }

    pub fn expects_accept(&self) -> bool {
        self.manifest.compile.expect == CompileExpect::Accept
    }

    pub fn compile(&self, registers: usize) -> Result<Vec<Compiled>, ThreadCompileError> {
        self.threads
            .iter()
            .map(|(name, c)| {
                compile(c, &self.policy, registers).map_err(|error| ThreadCompileError {
                    thread: name.clone(),
                    error,
                })
            })
            .collect()
    }
}

/// Loads every entry directory (one containing `manifest.json`) under
/// `path`, sorted by directory name.
pub fn load_corpus(path: &Path) -> Result<Vec<Entry>, CorpusError> {
    let io = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut dirs: Vec<PathBuf> = fs::read_dir(path)
        .map_err(io)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io)?;
    dirs.retain(|d| d.join("manifest.json").is_file());
    dirs.sort();
    dirs.iter().map(|d| Entry::load(d)).collect()
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::harness::{ScheduleSpec, Verdict};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompileExpect {
    Accept,
    Reject,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompileSpec {
    pub expect: CompileExpect,
    /// `stability` when rejection must come from the stability check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ScheduleBounds {
    Exhaustive { max_len: usize },
    Random { count: usize, len: usize, seed: u64 },
}

impl ScheduleBounds {
    pub fn spec(&self) -> ScheduleSpec {
        match *self {
            ScheduleBounds::Exhaustive { max_len } => ScheduleSpec::Exhaustive { max_len },
            ScheduleBounds::Random { count, len, seed } => ScheduleSpec::Random { count, len, seed },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub max_steps: usize,
    pub init_mems: usize,
    pub seed: u64,
    pub schedules: ScheduleBounds,
    pub compliance_runs: usize,
    pub havoc_samples: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            max_steps: 1000,
            init_mems: 100,
            seed: 1,
            schedules: ScheduleBounds::Exhaustive { max_len: 8 },
            compliance_runs: 50,
            havoc_samples: 10,
        }
    }
}

/// Contents of an entry's `manifest.json`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Set when the programs model described behaviour rather than
    /// transliterating published code.
    #[serde(default)]
    pub reconstructed: bool,
    pub policy: String,
    pub threads: Vec<String>,
    pub compile: CompileSpec,
    #[serde(default)]
    pub bounds: Bounds,
    /// Expected verdict per check name.
    #[serde(default)]
    pub expect: BTreeMap<String, Verdict>,
}

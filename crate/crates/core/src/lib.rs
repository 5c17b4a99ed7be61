//! Secure compilation of a lock-synchronised While language to a RISC-style
//! assembly, together with bounded dynamic checkers for value-dependent
//! noninterference, sound mode use and secure refinement.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: values, memory, mode state and classification policies.
//! * [`lang`]: the While source language and its small-step semantics.
//! * [`risc`]: the target instruction set and virtual machine.
//! * [`compiler`]: the single-pass compiler and its bookkeeping records.
//! * [`harness`]: bounded checkers over single threads and whole systems.
//! * [`corpus`]: loading of example systems and their expected verdicts.
//! * [`cli`]: the command-line front end.

pub mod cli;
pub mod compiler;
pub mod corpus;
pub mod harness;
pub mod lang;
pub mod model;
pub mod risc;

/// Version of the on-disk formats (policy, annotated JSON, manifest, reports).
pub const FORMAT_VERSION: &str = "1";

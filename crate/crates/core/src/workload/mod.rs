//! Benchmark workloads: the instruction format, seeded generators for the
//! three workload shapes, and the two engines that execute them.
//!
//! A stream manipulates a growing *corpus*. `REG`/`REGPT` append a
//! registered set, `OP` appends the result of an operation on two earlier
//! entries, and `GROW` appends a copy of an existing segment.

mod engine;
mod format;
mod generate;

use thiserror::Error;

use crate::error::LhfError;

pub use engine::{
    content_hash_flat, content_hash_nested, diff_digests, read_digest, run_lhf, run_naive,
    write_digest, DigestEntry, EngineKind, KindTiming, RunOptions, RunOutcome,
};
pub use format::{parse, serialize, Instruction, Target, Workload};
pub use generate::{generate, GenParams, Mode};

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("instruction {instruction} refers to corpus position {position}, but the corpus holds {len} entries")]
    Position {
        instruction: usize,
        position: usize,
        len: usize,
    },
    #[error("instruction {instruction} mixes scalar and points-to entries")]
    TargetMismatch { instruction: usize },
    #[error("invalid generator parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Lhf(#[from] LhfError),
}

//! Deduplicating, immutable, operation-memoizing storage for sets.
//!
//! The crate is organised bottom-up:
//!
//! - [`dedup`]: the generic value interner.
//! - [`forest`]: [`LatticeHashForest`], memoized set algebra over flat sets.
//! - [`nesting`]: sets whose elements carry indices into child forests.
//! - [`workload`]: instruction streams, seeded generators and the two engines.
//! - [`pointsto`]: a flow-sensitive points-to demo built on a nested construction.
//! - [`construct`]: JSON construction specs and their normalized plans.

pub mod construct;
pub mod dedup;
pub mod error;
pub mod forest;
pub mod nesting;
pub mod pointsto;
pub mod setops;
pub mod stats;
pub mod workload;

pub use error::{LhfError, Result, ValidationError};
pub use forest::{Index, LatticeHashForest, OpKind, OperationKey, PropertySet};
pub use nesting::{Construction, ForestId, NestedElement, NestingConfig};
pub use stats::{OpCounters, OpStats};

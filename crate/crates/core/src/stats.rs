//! Hit/miss accounting for memoized operations.

use std::fmt;
use std::ops::AddAssign;

use crate::forest::OpKind;

/// Outcome counters for one operation kind. Every invocation lands in
/// exactly one bucket.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounters {
    /// Operation already present in the operation map.
    pub hits: u64,
    /// Operands were the same index.
    pub equal_hits: u64,
    /// Answer deduced from a known subset relation.
    pub subset_hits: u64,
    /// An operand was the empty set.
    pub empty_hits: u64,
    /// Computed, and the result set was new.
    pub cold_misses: u64,
    /// Computed, and the result set already existed.
    pub edge_misses: u64,
}

impl OpCounters {
    pub fn invocations(&self) -> u64 {
        self.hits
            + self.equal_hits
            + self.subset_hits
            + self.empty_hits
            + self.cold_misses
            + self.edge_misses
    }

    /// Invocations answered without running the set algorithm.
    pub fn shortcuts(&self) -> u64 {
        self.hits + self.equal_hits + self.subset_hits + self.empty_hits
    }
}

impl AddAssign for OpCounters {
    fn add_assign(&mut self, rhs: Self) {
        self.hits += rhs.hits;
        self.equal_hits += rhs.equal_hits;
        self.subset_hits += rhs.subset_hits;
        self.empty_hits += rhs.empty_hits;
        self.cold_misses += rhs.cold_misses;
        self.edge_misses += rhs.edge_misses;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpStats {
    per_kind: [OpCounters; OpKind::ALL.len()],
}

impl OpStats {
    pub fn get(&self, kind: OpKind) -> &OpCounters {
        &self.per_kind[kind.slot()]
    }

    pub(crate) fn get_mut(&mut self, kind: OpKind) -> &mut OpCounters {
        &mut self.per_kind[kind.slot()]
    }

    pub fn total(&self) -> OpCounters {
        let mut sum = OpCounters::default();
        for c in &self.per_kind {
            sum += *c;
        }
        sum
    }

    pub fn iter(&self) -> impl Iterator<Item = (OpKind, &OpCounters)> {
        OpKind::ALL.iter().map(move |&k| (k, self.get(k)))
    }
}

impl AddAssign for OpStats {
    fn add_assign(&mut self, rhs: Self) {
        for k in OpKind::ALL {
            *self.get_mut(k) += *rhs.get(k);
        }
    }
}

impl fmt::Display for OpStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (kind, c) in self.iter() {
            writeln!(
                f,
                "{:<12} hits={} equal={} subset={} empty={} cold={} edge={}",
                kind.name(),
                c.hits,
                c.equal_hits,
                c.subset_hits,
                c.empty_hits,
                c.cold_misses,
                c.edge_misses
            )?;
        }
        Ok(())
    }
}

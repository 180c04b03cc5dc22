//! The lattice hash forest for flat property sets.
//!
//! Every distinct property set is interned once and named by a dense
//! [`Index`]; index 0 is always the empty set. Binary operations are
//! answered through a fixed ladder of cheap checks before any merge runs:
//!
//! 1. an operand is empty,
//! 2. both operands are the same index,
//! 3. the operation map already holds the edge,
//! 4. a recorded subset relation decides the answer,
//! 5. otherwise the sorted sequences are merged and the result registered.
//!
//! Computed results feed the operation map and the subset map, so the
//! structure grows into a lattice over the subset relation as it is used.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::Deref;
use std::sync::Arc;

use fnv::FnvHasher;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::dedup::{DedupError, Interner};
use crate::error::{LhfError, Result, ValidationError};
use crate::setops;
use crate::stats::OpStats;

/// Dense identifier of one property set inside one forest.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Index(u64);

impl Index {
    pub const EMPTY: Index = Index(0);

    pub const fn new(raw: u64) -> Self {
        Index(raw)
    }

    pub const fn get(self) -> u64 {
        self.0
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpKind {
    Union,
    Intersection,
    Difference,
    InsertSingle,
    RemoveSingle,
}

impl OpKind {
    pub const ALL: [OpKind; 5] = [
        OpKind::Union,
        OpKind::Intersection,
        OpKind::Difference,
        OpKind::InsertSingle,
        OpKind::RemoveSingle,
    ];

    pub const BINARY: [OpKind; 3] = [OpKind::Union, OpKind::Intersection, OpKind::Difference];

    pub fn is_commutative(self) -> bool {
        matches!(self, OpKind::Union | OpKind::Intersection)
    }

    pub fn is_binary(self) -> bool {
        matches!(self, OpKind::Union | OpKind::Intersection | OpKind::Difference)
    }

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Union => "union",
            OpKind::Intersection => "intersection",
            OpKind::Difference => "difference",
            OpKind::InsertSingle => "insert",
            OpKind::RemoveSingle => "remove",
        }
    }

    pub(crate) fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Memoization key: an operation kind and its operands.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum OperationKey<P> {
    Binary { kind: OpKind, lhs: Index, rhs: Index },
    Single { kind: OpKind, set: Index, element: P },
}

impl<P> OperationKey<P> {
    /// Builds a binary key, ordering commutative operands smaller-first.
    pub fn binary(kind: OpKind, lhs: Index, rhs: Index) -> Self {
        let (lhs, rhs) = if kind.is_commutative() && rhs < lhs {
            (rhs, lhs)
        } else {
            (lhs, rhs)
        };
        OperationKey::Binary { kind, lhs, rhs }
    }

    pub fn kind(&self) -> OpKind {
        match self {
            OperationKey::Binary { kind, .. } | OperationKey::Single { kind, .. } => *kind,
        }
    }
}

/// A sorted, duplicate-free, immutable sequence of properties.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PropertySet<P> {
    elements: Box<[P]>,
}

impl<P: Ord> PropertySet<P> {
    pub fn empty() -> Self {
        Self {
            elements: Box::new([]),
        }
    }

    pub fn from_sorted(elements: Vec<P>) -> std::result::Result<Self, ValidationError> {
        validate_sorted(&elements)?;
        Ok(Self::from_sorted_unchecked(elements))
    }

    pub fn from_sorted_unchecked(elements: Vec<P>) -> Self {
        Self {
            elements: elements.into_boxed_slice(),
        }
    }
}

impl<P> Deref for PropertySet<P> {
    type Target = [P];

    fn deref(&self) -> &[P] {
        &self.elements
    }
}

pub(crate) fn validate_sorted<P: Ord>(elements: &[P]) -> std::result::Result<(), ValidationError> {
    for (i, w) in elements.windows(2).enumerate() {
        match w[0].cmp(&w[1]) {
            std::cmp::Ordering::Less => {}
            std::cmp::Ordering::Equal => return Err(ValidationError::Duplicate(i + 1)),
            std::cmp::Ordering::Greater => return Err(ValidationError::Unsorted(i + 1)),
        }
    }
    Ok(())
}

/// Anything that can live in a property set.
pub trait Property: Ord + Hash + Clone + fmt::Debug {}

impl<T: Ord + Hash + Clone + fmt::Debug> Property for T {}

type Fingerprint = (u64, u64);

fn fingerprint<P: Hash>(set: &PropertySet<P>) -> Fingerprint {
    let mut sip = DefaultHasher::new();
    set.hash(&mut sip);
    let mut fnv = FnvHasher::default();
    set.hash(&mut fnv);
    (sip.finish(), fnv.finish())
}

/// Which ladder shortcuts are sound for the operation semantics in use.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Shortcuts {
    /// Operations with an empty operand have the usual set answers.
    pub empty: bool,
    /// `a - a` and `a - b` with `a ⊆ b` both give the empty set.
    pub collapse_difference: bool,
    /// Equal-operand and subset deductions are allowed at all.
    pub deductions: bool,
}

impl Shortcuts {
    pub const SET: Shortcuts = Shortcuts {
        empty: true,
        collapse_difference: true,
        deductions: true,
    };
}

pub(crate) enum Step {
    Done(Index),
    Compute,
}

#[derive(Debug)]
pub struct LatticeHashForest<P> {
    sets: Interner<PropertySet<P>>,
    sizes: Vec<usize>,
    binary_memo: [FxHashMap<(Index, Index), Index>; 3],
    single_memo: [FxHashMap<(Index, P), Index>; 2],
    subsets: FxHashSet<(Index, Index)>,
    producers: Vec<Option<OperationKey<P>>>,
    evicted: FxHashMap<Fingerprint, Index>,
    stats: OpStats,
    validate: bool,
}

impl<P: Property> Default for LatticeHashForest<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P: Property> LatticeHashForest<P> {
    pub fn new() -> Self {
        let mut sets = Interner::new();
        let empty = sets.intern(PropertySet::empty());
        debug_assert_eq!(empty, 0);
        Self {
            sets,
            sizes: vec![0],
            binary_memo: Default::default(),
            single_memo: Default::default(),
            subsets: FxHashSet::default(),
            producers: vec![None],
            evicted: FxHashMap::default(),
            stats: OpStats::default(),
            validate: true,
        }
    }

    /// Turns registration checks on or off. With checks off, unsorted or
    /// duplicated input silently breaks deduplication.
    pub fn set_validation(&mut self, on: bool) {
        self.validate = on;
    }

    pub fn validation(&self) -> bool {
        self.validate
    }

    pub fn register(&mut self, elements: Vec<P>) -> Result<Index> {
        if self.validate {
            validate_sorted(&elements)?;
        }
        Ok(self.register_set(PropertySet::from_sorted_unchecked(elements)).0)
    }

    /// Interns `set`, reviving an evicted index if the content matches one.
    pub(crate) fn register_set(&mut self, set: PropertySet<P>) -> (Index, bool) {
        if let Some(id) = self.sets.lookup(&set) {
            return (Index(id), false);
        }
        if !self.evicted.is_empty() {
            if let Some(id) = self.evicted.remove(&fingerprint(&set)) {
                self.sets
                    .restore(id.0, set)
                    .expect("evicted index is in range");
                return (id, false);
            }
        }
        let size = set.len();
        let (id, fresh) = self.sets.intern_full(set);
        debug_assert!(fresh);
        self.sizes.push(size);
        self.producers.push(None);
        (Index(id), true)
    }

    /// Number of registered sets, the empty set and evicted sets included.
    pub fn count(&self) -> u64 {
        self.sets.count()
    }

    pub fn contains_index(&self, a: Index) -> bool {
        a.0 < self.count()
    }

    pub(crate) fn check(&self, a: Index) -> Result<()> {
        if self.contains_index(a) {
            Ok(())
        } else {
            Err(LhfError::InvalidIndex(a))
        }
    }

    /// Read-only view of a resident set.
    pub fn resolve(&self, a: Index) -> Result<&PropertySet<P>> {
        self.sets.resolve(a.0).map_err(|e| map_dedup(a, e))
    }

    pub fn is_evicted(&self, a: Index) -> bool {
        self.contains_index(a) && !self.sets.is_resident(a.0)
    }

    pub fn size_of(&self, a: Index) -> Result<usize> {
        self.check(a)?;
        Ok(self.sizes[a.0 as usize])
    }

    /// Content equality, which deduplication reduces to index equality.
    pub fn equal(&self, a: Index, b: Index) -> bool {
        a == b
    }

    pub fn contains(&self, a: Index, p: &P) -> Result<bool> {
        Ok(self.resolve(a)?.binary_search(p).is_ok())
    }

    pub fn stats(&self) -> &OpStats {
        &self.stats
    }

    pub fn memo_entries(&self) -> usize {
        self.binary_memo.iter().map(|m| m.len()).sum::<usize>()
            + self.single_memo.iter().map(|m| m.len()).sum::<usize>()
    }

    pub fn subset_entries(&self) -> usize {
        self.subsets.len()
    }

    /// Elements held by resident sets.
    pub fn stored_elements(&self) -> u64 {
        self.sets.iter().map(|(_, s)| s.len() as u64).sum()
    }

    pub fn subset_pairs(&self) -> impl Iterator<Item = (Index, Index)> + '_ {
        self.subsets.iter().copied()
    }

    /// Every memoized edge as `(key, result)`.
    pub fn memo_edges(&self) -> Vec<(OperationKey<P>, Index)> {
        let mut edges = Vec::with_capacity(self.memo_entries());
        for kind in OpKind::BINARY {
            for (&(lhs, rhs), &r) in &self.binary_memo[kind.slot()] {
                edges.push((OperationKey::Binary { kind, lhs, rhs }, r));
            }
        }
        for kind in [OpKind::InsertSingle, OpKind::RemoveSingle] {
            for ((set, element), &r) in &self.single_memo[kind.slot() - 3] {
                let key = OperationKey::Single {
                    kind,
                    set: *set,
                    element: element.clone(),
                };
                edges.push((key, r));
            }
        }
        edges
    }

    pub fn producer(&self, a: Index) -> Option<&OperationKey<P>> {
        self.producers.get(a.0 as usize)?.as_ref()
    }

    pub fn set_union(&mut self, a: Index, b: Index) -> Result<Index> {
        self.binary(OpKind::Union, a, b)
    }

    pub fn set_intersection(&mut self, a: Index, b: Index) -> Result<Index> {
        self.binary(OpKind::Intersection, a, b)
    }

    pub fn set_difference(&mut self, a: Index, b: Index) -> Result<Index> {
        self.binary(OpKind::Difference, a, b)
    }

    pub fn binary(&mut self, kind: OpKind, a: Index, b: Index) -> Result<Index> {
        assert!(kind.is_binary(), "{kind} is not a binary operation");
        if let Step::Done(r) = self.begin_binary(kind, a, b, Shortcuts::SET)? {
            return Ok(r);
        }
        let lhs = self.access_or_recompute(a)?;
        let rhs = self.access_or_recompute(b)?;
        let out = compute_binary(kind, &lhs, &rhs);
        Ok(self.finish_binary(kind, a, b, out, true))
    }

    pub fn insert_element(&mut self, a: Index, p: P) -> Result<Index> {
        if let Some(r) = self.begin_single(OpKind::InsertSingle, a, &p)? {
            return Ok(r);
        }
        let set = self.access_or_recompute(a)?;
        Ok(match setops::insert(&set, &p) {
            None => self.single_noop(OpKind::InsertSingle, a, p),
            Some(out) => self.finish_single(OpKind::InsertSingle, a, p, out, true),
        })
    }

    pub fn remove_element(&mut self, a: Index, p: P) -> Result<Index> {
        if let Some(r) = self.begin_single(OpKind::RemoveSingle, a, &p)? {
            return Ok(r);
        }
        let set = self.access_or_recompute(a)?;
        Ok(match setops::remove(&set, &p) {
            None => self.single_noop(OpKind::RemoveSingle, a, p),
            Some(out) => self.finish_single(OpKind::RemoveSingle, a, p, out, true),
        })
    }

    /// True iff set `a` is contained in set `b`. Positive answers are
    /// remembered in the subset map.
    pub fn is_subset(&mut self, a: Index, b: Index) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        if a.is_empty() || a == b || self.subsets.contains(&(a, b)) {
            return Ok(true);
        }
        if b.is_empty() || self.sizes[a.0 as usize] > self.sizes[b.0 as usize] {
            return Ok(false);
        }
        let sa = self.access_or_recompute(a)?;
        let sb = self.access_or_recompute(b)?;
        let holds = setops::is_subset(&sa, &sb);
        if holds {
            self.subsets.insert((a, b));
        }
        Ok(holds)
    }

    /// Drops the content of `a`. The index stays reserved and every memo
    /// edge that mentions it stays valid.
    pub fn evict(&mut self, a: Index) -> Result<()> {
        if a.is_empty() {
            return Err(LhfError::EvictEmpty);
        }
        self.check(a)?;
        if let Ok(content) = self.sets.vacate(a.0) {
            self.evicted.insert(fingerprint(&content), a);
        }
        Ok(())
    }

    /// Returns the content of `a`, replaying its producing operation (and
    /// those of its operands) if it was evicted.
    pub fn access_or_recompute(&mut self, a: Index) -> Result<Arc<PropertySet<P>>> {
        self.check(a)?;
        if let Ok(set) = self.sets.resolve_shared(a.0) {
            return Ok(set);
        }
        let key = self.producers[a.0 as usize]
            .clone()
            .ok_or(LhfError::UnrecoverableEviction(a))?;
        // Producers only reference operands older than their result, so
        // the recursion bottoms out.
        let content = match key {
            OperationKey::Binary { kind, lhs, rhs } => {
                let x = self.access_or_recompute(lhs)?;
                let y = self.access_or_recompute(rhs)?;
                compute_binary(kind, &x, &y)
            }
            OperationKey::Single { kind, set, element } => {
                let x = self.access_or_recompute(set)?;
                let changed = if kind == OpKind::InsertSingle {
                    setops::insert(&x, &element)
                } else {
                    setops::remove(&x, &element)
                };
                changed.unwrap_or_else(|| x.to_vec())
            }
        };
        let set = PropertySet::from_sorted_unchecked(content);
        self.evicted.remove(&fingerprint(&set));
        Ok(self.sets.restore(a.0, set).expect("index checked above"))
    }

    pub(crate) fn begin_binary(
        &mut self,
        kind: OpKind,
        a: Index,
        b: Index,
        shortcuts: Shortcuts,
    ) -> Result<Step> {
        self.check(a)?;
        self.check(b)?;

        let empty = match kind {
            _ if !shortcuts.empty => None,
            OpKind::Union if a.is_empty() => Some(b),
            OpKind::Union if b.is_empty() => Some(a),
            OpKind::Intersection if a.is_empty() || b.is_empty() => Some(Index::EMPTY),
            OpKind::Difference if a.is_empty() => Some(Index::EMPTY),
            OpKind::Difference if b.is_empty() => Some(a),
            _ => None,
        };
        if let Some(r) = empty {
            self.stats.get_mut(kind).empty_hits += 1;
            return Ok(Step::Done(r));
        }

        if a == b && shortcuts.deductions {
            let r = match kind {
                OpKind::Difference if shortcuts.collapse_difference => Some(Index::EMPTY),
                OpKind::Difference => None,
                _ => Some(a),
            };
            if let Some(r) = r {
                self.stats.get_mut(kind).equal_hits += 1;
                return Ok(Step::Done(r));
            }
        }

        let key = memo_key(kind, a, b);
        if let Some(&r) = self.binary_memo[kind.slot()].get(&key) {
            self.stats.get_mut(kind).hits += 1;
            return Ok(Step::Done(r));
        }

        if shortcuts.deductions {
            let a_in_b = self.subsets.contains(&(a, b));
            let b_in_a = self.subsets.contains(&(b, a));
            let deduced = match kind {
                OpKind::Union if a_in_b => Some(b),
                OpKind::Union if b_in_a => Some(a),
                OpKind::Intersection if a_in_b => Some(a),
                OpKind::Intersection if b_in_a => Some(b),
                OpKind::Difference if a_in_b && shortcuts.collapse_difference => {
                    Some(Index::EMPTY)
                }
                _ => None,
            };
            if let Some(r) = deduced {
                self.stats.get_mut(kind).subset_hits += 1;
                self.binary_memo[kind.slot()].insert(key, r);
                return Ok(Step::Done(r));
            }
        }

        Ok(Step::Compute)
    }

    pub(crate) fn finish_binary(
        &mut self,
        kind: OpKind,
        a: Index,
        b: Index,
        elements: Vec<P>,
        infer_subsets: bool,
    ) -> Index {
        let (c, fresh) = self.register_set(PropertySet::from_sorted_unchecked(elements));
        let counters = self.stats.get_mut(kind);
        if fresh {
            counters.cold_misses += 1;
            self.producers[c.0 as usize] = Some(OperationKey::binary(kind, a, b));
        } else {
            counters.edge_misses += 1;
        }
        self.binary_memo[kind.slot()].insert(memo_key(kind, a, b), c);
        if infer_subsets {
            match kind {
                OpKind::Union => {
                    self.record_subset(a, c);
                    self.record_subset(b, c);
                }
                OpKind::Intersection => {
                    self.record_subset(c, a);
                    self.record_subset(c, b);
                }
                OpKind::Difference => self.record_subset(c, a),
                _ => {}
            }
        }
        c
    }

    pub(crate) fn begin_single(&mut self, kind: OpKind, a: Index, p: &P) -> Result<Option<Index>> {
        self.check(a)?;
        if kind == OpKind::RemoveSingle && a.is_empty() {
            self.stats.get_mut(kind).empty_hits += 1;
            return Ok(Some(Index::EMPTY));
        }
        let memo = &self.single_memo[kind.slot() - 3];
        if let Some(&r) = memo.get(&(a, p.clone())) {
            self.stats.get_mut(kind).hits += 1;
            return Ok(Some(r));
        }
        Ok(None)
    }

    /// The element operation leaves `a` unchanged.
    pub(crate) fn single_noop(&mut self, kind: OpKind, a: Index, p: P) -> Index {
        self.stats.get_mut(kind).equal_hits += 1;
        self.single_memo[kind.slot() - 3].insert((a, p), a);
        a
    }

    pub(crate) fn finish_single(
        &mut self,
        kind: OpKind,
        a: Index,
        p: P,
        elements: Vec<P>,
        infer_subsets: bool,
    ) -> Index {
        let (c, fresh) = self.register_set(PropertySet::from_sorted_unchecked(elements));
        let counters = self.stats.get_mut(kind);
        if fresh {
            counters.cold_misses += 1;
            self.producers[c.0 as usize] = Some(OperationKey::Single {
                kind,
                set: a,
                element: p.clone(),
            });
        } else {
            counters.edge_misses += 1;
        }
        self.single_memo[kind.slot() - 3].insert((a, p), c);
        if infer_subsets {
            match kind {
                OpKind::InsertSingle => self.record_subset(a, c),
                OpKind::RemoveSingle => self.record_subset(c, a),
                _ => {}
            }
        }
        c
    }

    fn record_subset(&mut self, sub: Index, sup: Index) {
        if sub != sup && !sub.is_empty() {
            self.subsets.insert((sub, sup));
        }
    }
}

fn memo_key(kind: OpKind, a: Index, b: Index) -> (Index, Index) {
    if kind.is_commutative() && b < a {
        (b, a)
    } else {
        (a, b)
    }
}

fn map_dedup(a: Index, e: DedupError) -> LhfError {
    match e {
        DedupError::OutOfRange { .. } => LhfError::InvalidIndex(a),
        DedupError::Vacant(_) => LhfError::Evicted(a),
    }
}

pub(crate) fn compute_binary<P: Ord + Clone>(kind: OpKind, a: &[P], b: &[P]) -> Vec<P> {
    match kind {
        OpKind::Union => setops::union(a, b),
        OpKind::Intersection => setops::intersection(a, b),
        OpKind::Difference => setops::difference(a, b),
        _ => unreachable!("{kind} is not binary"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn walkthrough() -> (LatticeHashForest<u64>, Index, Index, Index) {
        let mut lhf = LatticeHashForest::new();
        let a = lhf.register(vec![1, 2, 3]).unwrap();
        let b = lhf.register(vec![1, 2, 4]).unwrap();
        let c = lhf.set_union(a, b).unwrap();
        (lhf, a, b, c)
    }

    #[test]
    fn fresh_forest() {
        let mut lhf = LatticeHashForest::<u64>::new();
        assert_eq!(lhf.count(), 1);
        assert!(lhf.resolve(Index::EMPTY).unwrap().is_empty());
        assert_eq!(lhf.register(vec![]).unwrap(), Index::EMPTY);
        assert_eq!(lhf.stats().total().invocations(), 0);
    }

    #[test]
    fn registration_ids_follow_walkthrough() {
        let (lhf, a, b, c) = walkthrough();
        assert_eq!((a.get(), b.get(), c.get()), (1, 2, 3));
        assert_eq!(&**lhf.resolve(c).unwrap(), &[1, 2, 3, 4]);
        assert_eq!(lhf.stats().get(OpKind::Union).cold_misses, 1);
        assert!(!lhf.equal(a, b));
    }

    #[test]
    fn repeated_union_hits_memo() {
        let (mut lhf, a, b, c) = walkthrough();
        assert_eq!(lhf.set_union(a, b).unwrap(), c);
        assert_eq!(lhf.set_union(b, a).unwrap(), c);
        assert_eq!(lhf.stats().get(OpKind::Union).hits, 2);
        assert_eq!(lhf.count(), 4);
    }

    #[test]
    fn register_rejects_bad_input() {
        let mut lhf = LatticeHashForest::<u64>::new();
        assert_eq!(
            lhf.register(vec![3, 1, 2]),
            Err(LhfError::Validation(ValidationError::Unsorted(1)))
        );
        assert_eq!(
            lhf.register(vec![1, 1]),
            Err(LhfError::Validation(ValidationError::Duplicate(1)))
        );
        lhf.set_validation(false);
        assert!(lhf.register(vec![3, 1, 2]).is_ok());
    }

    #[test]
    fn empty_and_equal_shortcuts() {
        let (mut lhf, a, b, _) = walkthrough();
        assert_eq!(lhf.set_union(Index::EMPTY, a).unwrap(), a);
        assert_eq!(lhf.set_union(a, Index::EMPTY).unwrap(), a);
        assert_eq!(lhf.set_intersection(a, Index::EMPTY).unwrap(), Index::EMPTY);
        assert_eq!(lhf.set_intersection(b, b).unwrap(), b);
        assert_eq!(lhf.set_difference(a, a).unwrap(), Index::EMPTY);
        assert_eq!(lhf.set_difference(a, Index::EMPTY).unwrap(), a);
        assert_eq!(lhf.set_difference(Index::EMPTY, a).unwrap(), Index::EMPTY);
        let u = lhf.stats().get(OpKind::Union);
        assert_eq!(u.empty_hits, 2);
        assert_eq!(lhf.stats().get(OpKind::Difference).equal_hits, 1);
    }

    #[test]
    fn subset_deduction_after_union() {
        let (mut lhf, a, b, c) = walkthrough();
        assert!(lhf.is_subset(a, c).unwrap());
        assert_eq!(lhf.set_union(a, c).unwrap(), c);
        assert_eq!(lhf.set_intersection(c, b).unwrap(), b);
        assert_eq!(lhf.set_difference(a, c).unwrap(), Index::EMPTY);
        assert_eq!(lhf.stats().get(OpKind::Union).subset_hits, 1);
        assert_eq!(lhf.stats().get(OpKind::Intersection).subset_hits, 1);
        assert_eq!(lhf.stats().get(OpKind::Difference).subset_hits, 1);
        // deduced answers are memoized
        assert_eq!(lhf.set_union(c, a).unwrap(), c);
        assert_eq!(lhf.stats().get(OpKind::Union).hits, 1);
    }

    #[test]
    fn edge_miss_when_result_exists() {
        let (mut lhf, a, b, _) = walkthrough();
        let two = lhf.register(vec![1, 2]).unwrap();
        assert_eq!(lhf.set_intersection(a, b).unwrap(), two);
        assert_eq!(lhf.stats().get(OpKind::Intersection).edge_misses, 1);
    }

    #[test]
    fn element_operations() {
        let mut lhf = LatticeHashForest::<u64>::new();
        let five = lhf.insert_element(Index::EMPTY, 5).unwrap();
        assert_eq!(&**lhf.resolve(five).unwrap(), &[5]);
        assert_eq!(lhf.insert_element(Index::EMPTY, 5).unwrap(), five);
        assert_eq!(lhf.stats().get(OpKind::InsertSingle).hits, 1);
        assert_eq!(lhf.insert_element(five, 5).unwrap(), five);
        assert_eq!(lhf.stats().get(OpKind::InsertSingle).equal_hits, 1);
        assert_eq!(lhf.remove_element(Index::EMPTY, 5).unwrap(), Index::EMPTY);
        assert_eq!(lhf.remove_element(five, 5).unwrap(), Index::EMPTY);
        assert_eq!(lhf.remove_element(five, 7).unwrap(), five);
        assert!(lhf.contains(five, &5).unwrap());
        assert!(!lhf.contains(Index::EMPTY, &5).unwrap());
    }

    #[test]
    fn invalid_indices_are_rejected() {
        let mut lhf = LatticeHashForest::<u64>::new();
        let bad = Index::new(9);
        assert_eq!(lhf.set_union(bad, Index::EMPTY), Err(LhfError::InvalidIndex(bad)));
        assert_eq!(lhf.size_of(bad), Err(LhfError::InvalidIndex(bad)));
        assert_eq!(lhf.evict(bad), Err(LhfError::InvalidIndex(bad)));
        assert_eq!(lhf.is_subset(Index::EMPTY, bad), Err(LhfError::InvalidIndex(bad)));
        assert_eq!(lhf.stats().total().invocations(), 0);
    }

    #[test]
    fn eviction_recomputes_from_producer() {
        let (mut lhf, _, _, c) = walkthrough();
        lhf.evict(c).unwrap();
        assert_eq!(lhf.resolve(c), Err(LhfError::Evicted(c)));
        assert!(lhf.equal(c, c));
        assert_eq!(lhf.size_of(c).unwrap(), 4);
        assert_eq!(&**lhf.access_or_recompute(c).unwrap(), &[1, 2, 3, 4]);
        assert_eq!(&**lhf.resolve(c).unwrap(), &[1, 2, 3, 4]);
    }

    #[test]
    fn evicting_registered_set_is_unrecoverable() {
        let (mut lhf, a, _, _) = walkthrough();
        assert_eq!(lhf.evict(Index::EMPTY), Err(LhfError::EvictEmpty));
        lhf.evict(a).unwrap();
        assert_eq!(lhf.access_or_recompute(a), Err(LhfError::UnrecoverableEviction(a)));
        // re-registering the same content revives the original index
        assert_eq!(lhf.register(vec![1, 2, 3]).unwrap(), a);
        assert_eq!(&**lhf.resolve(a).unwrap(), &[1, 2, 3]);
    }

    #[test]
    fn eviction_chain() {
        let (mut lhf, a, _, c) = walkthrough();
        let d = lhf.insert_element(c, 9).unwrap();
        let e = lhf.set_difference(d, a).unwrap();
        let snapshot: Vec<u64> = lhf.resolve(e).unwrap().to_vec();
        lhf.evict(d).unwrap();
        lhf.evict(e).unwrap();
        lhf.evict(c).unwrap();
        assert_eq!(lhf.access_or_recompute(e).unwrap().to_vec(), snapshot);
        assert!(!lhf.is_evicted(d));
        assert!(!lhf.is_evicted(c));
    }

    #[test]
    fn operation_result_revives_evicted_index() {
        let (mut lhf, a, b, c) = walkthrough();
        let again = lhf.insert_element(a, 4).unwrap();
        assert_eq!(again, c);
        lhf.evict(c).unwrap();
        let x = lhf.register(vec![4]).unwrap();
        let three = lhf.register(vec![3]).unwrap();
        assert_eq!(lhf.set_union(b, three).unwrap(), c);
        assert_eq!(lhf.set_union(x, a).unwrap(), c);
        assert!(!lhf.is_evicted(c));
    }
}

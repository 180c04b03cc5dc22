//! Constructions of nested forests.
//!
//! A nested forest stores sets of [`NestedElement`]s: a scalar key paired
//! with a fixed-arity tuple of indices, one per child forest. Binary
//! operations follow the natural nesting scheme: elements whose key occurs
//! on one side only survive according to how the operation treats an empty
//! counterpart, and elements sharing a key are combined by running the same
//! operation position-wise in the child forests. Every level memoizes on
//! its own, so a repeated parent operation never reaches the children.

use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::error::{LhfError, Result, ValidationError};
use crate::forest::{Index, LatticeHashForest, OpKind, PropertySet, Shortcuts, Step};
use crate::stats::OpStats;

pub type Children = SmallVec<[Index; 2]>;

/// A key with one child-set index per child forest. Ordered by key, then
/// by children.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NestedElement {
    pub key: u64,
    pub children: Children,
}

impl NestedElement {
    pub fn new(key: u64, children: &[Index]) -> Self {
        Self {
            key,
            children: children.iter().copied().collect(),
        }
    }

    fn all_empty(&self) -> bool {
        self.children.iter().all(|c| c.is_empty())
    }
}

/// Handle of one forest inside a [`Construction`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ForestId(usize);

impl ForestId {
    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for ForestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Set of operation kinds a forest provides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OpSet(u8);

impl OpSet {
    pub const fn all() -> Self {
        OpSet(0b1_1111)
    }

    pub const fn none() -> Self {
        OpSet(0)
    }

    pub fn with(self, kind: OpKind) -> Self {
        OpSet(self.0 | (1 << kind.slot()))
    }

    pub fn contains(self, kind: OpKind) -> bool {
        self.0 & (1 << kind.slot()) != 0
    }
}

impl FromIterator<OpKind> for OpSet {
    fn from_iter<I: IntoIterator<Item = OpKind>>(iter: I) -> Self {
        iter.into_iter().fold(OpSet::none(), OpSet::with)
    }
}

/// Per-kind rules of a nested binary operation.
///
/// The defaults give natural nesting. Overriding any rule other than
/// [`NestingBehavior::child_operation`] with non-natural semantics must also
/// return `false` from [`NestingBehavior::set_shortcuts`], which disables
/// the ladder's algebraic shortcuts for the forest.
pub trait NestingBehavior: fmt::Debug + Send + Sync {
    /// Whether an element whose key occurs only in the left operand survives.
    fn keeps_left_only(&self, kind: OpKind) -> bool {
        matches!(kind, OpKind::Union | OpKind::Difference)
    }

    /// Whether an element whose key occurs only in the right operand survives.
    fn keeps_right_only(&self, kind: OpKind) -> bool {
        kind == OpKind::Union
    }

    /// Operation run in child forest `position` for a shared key.
    fn child_operation(&self, kind: OpKind, _position: usize) -> OpKind {
        kind
    }

    fn set_shortcuts(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NaturalNesting;

impl NestingBehavior for NaturalNesting {}

#[derive(Debug, Clone)]
pub struct NestingConfig {
    /// Drop a shared-key element whose recursive result is empty in every
    /// child position.
    pub drop_all_empty: bool,
    pub behavior: Arc<dyn NestingBehavior>,
}

impl Default for NestingConfig {
    fn default() -> Self {
        Self {
            drop_all_empty: true,
            behavior: Arc::new(NaturalNesting),
        }
    }
}

impl NestingConfig {
    /// Keeps shared keys even when every child result is empty.
    pub fn literal() -> Self {
        Self {
            drop_all_empty: false,
            ..Self::default()
        }
    }
}

#[derive(Debug)]
pub struct NestedForest {
    forest: LatticeHashForest<NestedElement>,
    children: Vec<ForestId>,
    config: NestingConfig,
    collapse_difference: bool,
}

impl NestedForest {
    pub fn forest(&self) -> &LatticeHashForest<NestedElement> {
        &self.forest
    }

    pub fn children(&self) -> &[ForestId] {
        &self.children
    }

    pub fn config(&self) -> &NestingConfig {
        &self.config
    }

    fn shortcuts(&self) -> Shortcuts {
        let natural = self.config.behavior.set_shortcuts();
        Shortcuts {
            empty: natural,
            deductions: natural,
            collapse_difference: self.collapse_difference,
        }
    }
}

#[derive(Debug)]
enum Node {
    Flat(LatticeHashForest<u64>),
    Nested(NestedForest),
}

#[derive(Debug)]
struct Slot {
    node: Node,
    ops: OpSet,
}

/// Fully expanded content of a set, children included.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SetValue {
    Flat(Vec<u64>),
    Nested(Vec<(u64, Vec<SetValue>)>),
}

/// An acyclic arrangement of forests. Children are always added before the
/// forests that nest them.
#[derive(Debug, Default)]
pub struct Construction {
    slots: Vec<Slot>,
}

impl Construction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_flat(&mut self, ops: OpSet) -> ForestId {
        self.slots.push(Slot {
            node: Node::Flat(LatticeHashForest::new()),
            ops,
        });
        ForestId(self.slots.len() - 1)
    }

    pub fn add_nested(
        &mut self,
        ops: OpSet,
        children: &[ForestId],
        config: NestingConfig,
    ) -> Result<ForestId> {
        if children.is_empty() {
            return Err(LhfError::ConstructionMismatch(
                "a nested forest needs at least one child".into(),
            ));
        }
        let mut collapse_difference = config.drop_all_empty && config.behavior.set_shortcuts();
        for &child in children {
            collapse_difference &= self.collapses_difference(child)?;
        }
        let nested = NestedForest {
            forest: LatticeHashForest::new(),
            children: children.to_vec(),
            config,
            collapse_difference,
        };
        self.slots.push(Slot {
            node: Node::Nested(nested),
            ops,
        });
        Ok(ForestId(self.slots.len() - 1))
    }

    fn collapses_difference(&self, id: ForestId) -> Result<bool> {
        Ok(match &self.slot(id)?.node {
            Node::Flat(_) => true,
            Node::Nested(n) => n.collapse_difference,
        })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    fn slot(&self, id: ForestId) -> Result<&Slot> {
        self.slots.get(id.0).ok_or(LhfError::UnknownForest(id.0))
    }

    fn slot_mut(&mut self, id: ForestId) -> Result<&mut Slot> {
        self.slots.get_mut(id.0).ok_or(LhfError::UnknownForest(id.0))
    }

    pub fn is_nested(&self, id: ForestId) -> Result<bool> {
        Ok(matches!(self.slot(id)?.node, Node::Nested(_)))
    }

    pub fn ops(&self, id: ForestId) -> Result<OpSet> {
        Ok(self.slot(id)?.ops)
    }

    pub fn flat(&self, id: ForestId) -> Result<&LatticeHashForest<u64>> {
        match &self.slot(id)?.node {
            Node::Flat(f) => Ok(f),
            Node::Nested(_) => Err(mismatch(id, "flat")),
        }
    }

    pub fn flat_mut(&mut self, id: ForestId) -> Result<&mut LatticeHashForest<u64>> {
        match &mut self.slot_mut(id)?.node {
            Node::Flat(f) => Ok(f),
            Node::Nested(_) => Err(mismatch(id, "flat")),
        }
    }

    pub fn nested(&self, id: ForestId) -> Result<&NestedForest> {
        match &self.slot(id)?.node {
            Node::Nested(n) => Ok(n),
            Node::Flat(_) => Err(mismatch(id, "nested")),
        }
    }

    fn nested_mut(&mut self, id: ForestId) -> Result<&mut NestedForest> {
        match &mut self.slot_mut(id)?.node {
            Node::Nested(n) => Ok(n),
            Node::Flat(_) => Err(mismatch(id, "nested")),
        }
    }

    pub fn stats(&self, id: ForestId) -> Result<OpStats> {
        Ok(match &self.slot(id)?.node {
            Node::Flat(f) => *f.stats(),
            Node::Nested(n) => *n.forest.stats(),
        })
    }

    pub fn count(&self, id: ForestId) -> Result<u64> {
        Ok(match &self.slot(id)?.node {
            Node::Flat(f) => f.count(),
            Node::Nested(n) => n.forest.count(),
        })
    }

    pub fn memo_entries(&self, id: ForestId) -> Result<usize> {
        Ok(match &self.slot(id)?.node {
            Node::Flat(f) => f.memo_entries() + f.subset_entries(),
            Node::Nested(n) => n.forest.memo_entries() + n.forest.subset_entries(),
        })
    }

    /// Elements held across resident sets of forest `id`.
    pub fn stored_elements(&self, id: ForestId) -> Result<u64> {
        Ok(match &self.slot(id)?.node {
            Node::Flat(f) => f.stored_elements(),
            Node::Nested(n) => n.forest.stored_elements(),
        })
    }

    pub fn contains_index(&self, id: ForestId, a: Index) -> Result<bool> {
        Ok(match &self.slot(id)?.node {
            Node::Flat(f) => f.contains_index(a),
            Node::Nested(n) => n.forest.contains_index(a),
        })
    }

    fn require(&self, id: ForestId, kind: OpKind) -> Result<()> {
        if self.slot(id)?.ops.contains(kind) {
            Ok(())
        } else {
            Err(LhfError::UnsupportedOperation {
                forest: id.0,
                kind,
            })
        }
    }

    pub fn register_flat(&mut self, id: ForestId, elements: Vec<u64>) -> Result<Index> {
        self.flat_mut(id)?.register(elements)
    }

    pub fn register_nested(&mut self, id: ForestId, elements: Vec<NestedElement>) -> Result<Index> {
        let n = self.nested(id)?;
        if n.forest.validation() {
            self.validate_nested(id, &elements)?;
        }
        let n = self.nested_mut(id)?;
        Ok(n.forest.register_set(PropertySet::from_sorted_unchecked(elements)).0)
    }

    fn validate_nested(&self, id: ForestId, elements: &[NestedElement]) -> Result<()> {
        let n = self.nested(id)?;
        for (i, e) in elements.iter().enumerate() {
            if i > 0 {
                let prev = elements[i - 1].key;
                if e.key == prev {
                    return Err(ValidationError::DuplicateKey(i).into());
                }
                if e.key < prev {
                    return Err(ValidationError::Unsorted(i).into());
                }
            }
            self.validate_children(n, i, &e.children)?;
            if n.config.drop_all_empty && e.all_empty() {
                return Err(ValidationError::EmptyChildren(i).into());
            }
        }
        Ok(())
    }

    fn validate_children(&self, n: &NestedForest, position: usize, children: &[Index]) -> Result<()> {
        if children.len() != n.children.len() {
            return Err(ValidationError::Arity {
                position,
                expected: n.children.len(),
                found: children.len(),
            }
            .into());
        }
        for (&child, &index) in n.children.iter().zip(children) {
            if !self.contains_index(child, index)? {
                return Err(ValidationError::DanglingChild { position, index }.into());
            }
        }
        Ok(())
    }

    /// Runs a binary operation in forest `id`, dispatching to the flat
    /// merge or to the nested recursion as the forest requires.
    pub fn operate(&mut self, id: ForestId, kind: OpKind, a: Index, b: Index) -> Result<Index> {
        assert!(kind.is_binary(), "{kind} is not a binary operation");
        self.require(id, kind)?;
        match &mut self.slot_mut(id)?.node {
            Node::Flat(f) => f.binary(kind, a, b),
            Node::Nested(_) => self.nested_operate(id, kind, a, b),
        }
    }

    pub fn union(&mut self, id: ForestId, a: Index, b: Index) -> Result<Index> {
        self.operate(id, OpKind::Union, a, b)
    }

    pub fn intersection(&mut self, id: ForestId, a: Index, b: Index) -> Result<Index> {
        self.operate(id, OpKind::Intersection, a, b)
    }

    pub fn difference(&mut self, id: ForestId, a: Index, b: Index) -> Result<Index> {
        self.operate(id, OpKind::Difference, a, b)
    }

    fn nested_operate(&mut self, id: ForestId, kind: OpKind, a: Index, b: Index) -> Result<Index> {
        let n = self.nested_mut(id)?;
        let shortcuts = n.shortcuts();
        if let Step::Done(r) = n.forest.begin_binary(kind, a, b, shortcuts)? {
            return Ok(r);
        }
        let lhs = n.forest.access_or_recompute(a)?;
        let rhs = n.forest.access_or_recompute(b)?;
        let children = n.children.clone();
        let behavior = Arc::clone(&n.config.behavior);
        let drop_all_empty = n.config.drop_all_empty;

        let keep_left = behavior.keeps_left_only(kind);
        let keep_right = behavior.keeps_right_only(kind);
        let mut out = Vec::with_capacity(lhs.len().max(rhs.len()));
        let (mut i, mut j) = (0, 0);
        while i < lhs.len() || j < rhs.len() {
            let order = match (lhs.get(i), rhs.get(j)) {
                (Some(x), Some(y)) => x.key.cmp(&y.key),
                (Some(_), None) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            };
            match order {
                std::cmp::Ordering::Less => {
                    if keep_left {
                        out.push(lhs[i].clone());
                    }
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    if keep_right {
                        out.push(rhs[j].clone());
                    }
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let (x, y) = (&lhs[i], &rhs[j]);
                    let mut combined = Children::with_capacity(children.len());
                    for (pos, &child) in children.iter().enumerate() {
                        let child_kind = behavior.child_operation(kind, pos);
                        combined.push(self.operate(child, child_kind, x.children[pos], y.children[pos])?);
                    }
                    let element = NestedElement {
                        key: x.key,
                        children: combined,
                    };
                    if !(drop_all_empty && element.all_empty()) {
                        out.push(element);
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        let n = self.nested_mut(id)?;
        Ok(n.forest.finish_binary(kind, a, b, out, false))
    }

    /// Sorted keys of a nested set.
    pub fn keys_of(&self, id: ForestId, a: Index) -> Result<Vec<u64>> {
        let set = self.nested(id)?.forest.resolve(a)?;
        Ok(set.iter().map(|e| e.key).collect())
    }

    /// Child indices stored under `key`, if present.
    pub fn value_of(&self, id: ForestId, a: Index, key: u64) -> Result<Option<Children>> {
        let set = self.nested(id)?.forest.resolve(a)?;
        Ok(set
            .binary_search_by_key(&key, |e| e.key)
            .ok()
            .map(|pos| set[pos].children.clone()))
    }

    /// Strong update: the element keyed `key` ends up with exactly
    /// `children`. All-empty children remove the key when the forest drops
    /// empty elements.
    pub fn set_key_value(&mut self, id: ForestId, a: Index, key: u64, children: &[Index]) -> Result<Index> {
        self.require(id, OpKind::InsertSingle)?;
        let n = self.nested(id)?;
        n.forest.check(a)?;
        self.validate_children(n, 0, children)?;
        let element = NestedElement::new(key, children);
        if n.config.drop_all_empty && element.all_empty() {
            return self.remove_key(id, a, key);
        }
        let n = self.nested_mut(id)?;
        let kind = OpKind::InsertSingle;
        if let Some(r) = n.forest.begin_single(kind, a, &element)? {
            return Ok(r);
        }
        let set = n.forest.access_or_recompute(a)?;
        Ok(match set.binary_search_by_key(&key, |e| e.key) {
            Ok(pos) if set[pos] == element => n.forest.single_noop(kind, a, element),
            Ok(pos) => {
                let mut out = set.to_vec();
                out[pos] = element.clone();
                n.forest.finish_single(kind, a, element, out, false)
            }
            Err(pos) => {
                let mut out = Vec::with_capacity(set.len() + 1);
                out.extend_from_slice(&set[..pos]);
                out.push(element.clone());
                out.extend_from_slice(&set[pos..]);
                n.forest.finish_single(kind, a, element, out, true)
            }
        })
    }

    pub fn remove_key(&mut self, id: ForestId, a: Index, key: u64) -> Result<Index> {
        self.require(id, OpKind::RemoveSingle)?;
        let n = self.nested_mut(id)?;
        let kind = OpKind::RemoveSingle;
        // memo key for a removal is the bare key with no children
        let probe = NestedElement::new(key, &[]);
        if let Some(r) = n.forest.begin_single(kind, a, &probe)? {
            return Ok(r);
        }
        let set = n.forest.access_or_recompute(a)?;
        Ok(match set.binary_search_by_key(&key, |e| e.key) {
            Err(_) => n.forest.single_noop(kind, a, probe),
            Ok(pos) => {
                let mut out = set.to_vec();
                out.remove(pos);
                n.forest.finish_single(kind, a, probe, out, true)
            }
        })
    }

    pub fn is_subset(&mut self, id: ForestId, a: Index, b: Index) -> Result<bool> {
        match &mut self.slot_mut(id)?.node {
            Node::Flat(f) => f.is_subset(a, b),
            Node::Nested(n) => n.forest.is_subset(a, b),
        }
    }

    /// Evicts a set from a flat forest. Nested forests keep their sets.
    pub fn evict(&mut self, id: ForestId, a: Index) -> Result<()> {
        self.flat_mut(id)?.evict(a)
    }

    /// Expands a set into plain values, recomputing evicted children.
    pub fn expand(&mut self, id: ForestId, a: Index) -> Result<SetValue> {
        match &mut self.slot_mut(id)?.node {
            Node::Flat(f) => Ok(SetValue::Flat(f.access_or_recompute(a)?.to_vec())),
            Node::Nested(n) => {
                let set = n.forest.access_or_recompute(a)?;
                let children = n.children.clone();
                let mut out = Vec::with_capacity(set.len());
                for e in set.iter() {
                    let mut values = Vec::with_capacity(children.len());
                    for (&child, &index) in children.iter().zip(&e.children) {
                        values.push(self.expand(child, index)?);
                    }
                    out.push((e.key, values));
                }
                Ok(SetValue::Nested(out))
            }
        }
    }
}

fn mismatch(id: ForestId, wanted: &str) -> LhfError {
    LhfError::ConstructionMismatch(format!("forest {id} is not {wanted}"))
}

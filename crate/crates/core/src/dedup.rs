//! Generic deduplicating interner.
//!
//! Values are moved into stable heap slots and handed out dense `u64`
//! identifiers in insertion order. The reverse table is keyed by the same
//! `Arc` that owns the slot, so a value's payload exists exactly once no
//! matter how large it is.

use std::hash::Hash;
use std::sync::Arc;

use rustc_hash::FxHashMap;
use thiserror::Error;

/// Dense identifier handed out by an [`Interner`].
pub type Id = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DedupError {
    #[error("identifier {id} is out of range (interner holds {len} values)")]
    OutOfRange { id: Id, len: u64 },
    #[error("identifier {0} has no resident value")]
    Vacant(Id),
}

#[derive(Debug)]
pub struct Interner<V> {
    storage: Vec<Option<Arc<V>>>,
    reverse: FxHashMap<Arc<V>, Id>,
}

impl<V: Hash + Eq> Default for Interner<V> {
    fn default() -> Self {
        Self::new()
    }
}

impl<V: Hash + Eq> Interner<V> {
    pub fn new() -> Self {
        Self {
            storage: Vec::new(),
            reverse: FxHashMap::default(),
        }
    }

    /// Returns the identifier for `value`, storing it first if no
    /// content-equal value is present.
    pub fn intern(&mut self, value: V) -> Id {
        self.intern_full(value).0
    }

    /// Like [`Interner::intern`] but also reports whether the value was new.
    pub fn intern_full(&mut self, value: V) -> (Id, bool) {
        if let Some(&id) = self.reverse.get(&value) {
            return (id, false);
        }
        let id = self.storage.len() as Id;
        let slot = Arc::new(value);
        self.reverse.insert(Arc::clone(&slot), id);
        self.storage.push(Some(slot));
        (id, true)
    }

    pub fn lookup(&self, value: &V) -> Option<Id> {
        self.reverse.get(value).copied()
    }

    pub fn resolve(&self, id: Id) -> Result<&V, DedupError> {
        self.slot(id)?
            .as_deref()
            .ok_or(DedupError::Vacant(id))
    }

    /// Shared handle to the stored value; stays valid even if the slot is
    /// later vacated.
    pub fn resolve_shared(&self, id: Id) -> Result<Arc<V>, DedupError> {
        self.slot(id)?.clone().ok_or(DedupError::Vacant(id))
    }

    /// Number of identifiers handed out, resident or not.
    pub fn count(&self) -> u64 {
        self.storage.len() as u64
    }

    pub fn is_resident(&self, id: Id) -> bool {
        matches!(self.storage.get(id as usize), Some(Some(_)))
    }

    /// Drops the resident value for `id` from both tables while keeping the
    /// identifier reserved. Returns the value that was resident.
    pub fn vacate(&mut self, id: Id) -> Result<Arc<V>, DedupError> {
        let len = self.count();
        let slot = self
            .storage
            .get_mut(id as usize)
            .ok_or(DedupError::OutOfRange { id, len })?;
        let value = slot.take().ok_or(DedupError::Vacant(id))?;
        self.reverse.remove(&*value);
        Ok(value)
    }

    /// Puts a value back into a vacated slot. The caller guarantees the
    /// value is content-equal to the one that was vacated.
    pub fn restore(&mut self, id: Id, value: V) -> Result<Arc<V>, DedupError> {
        let len = self.count();
        let slot = self
            .storage
            .get_mut(id as usize)
            .ok_or(DedupError::OutOfRange { id, len })?;
        if let Some(existing) = slot {
            return Ok(Arc::clone(existing));
        }
        let value = Arc::new(value);
        *slot = Some(Arc::clone(&value));
        self.reverse.insert(Arc::clone(&value), id);
        Ok(value)
    }

    /// Iterates over resident values with their identifiers.
    pub fn iter(&self) -> impl Iterator<Item = (Id, &V)> {
        self.storage
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.as_deref().map(|v| (i as Id, v)))
    }

    fn slot(&self, id: Id) -> Result<&Option<Arc<V>>, DedupError> {
        self.storage.get(id as usize).ok_or(DedupError::OutOfRange {
            id,
            len: self.count(),
        })
    }
}

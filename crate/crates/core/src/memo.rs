//! Call memoization shared across mutants, and the mutation cache that vetoes
//! reuse when a mutant's own mutation ran inside the call.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::lang::PlainValue;
use crate::mutagen::MutantId;

/// A user-function call with concrete argument values.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CallKey {
    pub func: u32,
    pub args: Vec<PlainValue>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MemoEntry {
    pub value: PlainValue,
    /// Statements a standalone execution of the call runs.
    pub cost: u64,
    /// Call depth the execution reaches, counting the call itself as 1.
    pub depth: usize,
    /// Mutation points the execution evaluated.
    pub touched: Arc<BTreeSet<u32>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoStats {
    pub hits: u64,
    pub misses: u64,
    pub stores: u64,
    pub clears: u64,
}

/// Records which mutation points ran inside each call. `(m, key)` is present
/// when `m`'s mutation point was evaluated within some execution of `key`.
#[derive(Clone, Debug)]
pub struct MutationCache {
    entries: HashMap<CallKey, BTreeSet<u32>>,
    /// Point of each mutant, indexed by `id - 1`.
    mutant_point: Arc<[u32]>,
}

impl MutationCache {
    pub fn new(mutant_point: Arc<[u32]>) -> Self {
        MutationCache { entries: HashMap::new(), mutant_point }
    }

    fn point(&self, m: MutantId) -> Option<u32> {
        m.0.checked_sub(1).and_then(|i| self.mutant_point.get(i as usize).copied())
    }

    /// Adds `(m, k)` for every `m` in `mutants` and every `k` on `stack`.
    /// Returns the number of new records.
    pub fn record_mutation_encounter(&mut self, stack: &[CallKey], mutants: &BTreeSet<MutantId>) -> u64 {
        let points: BTreeSet<u32> = mutants.iter().filter_map(|m| self.point(*m)).collect();
        stack.iter().map(|k| self.record_points(k, &points)).sum()
    }

    /// Marks every mutant of `points` as encountered within `key`.
    pub fn record_points(&mut self, key: &CallKey, points: &BTreeSet<u32>) -> u64 {
        if points.is_empty() {
            return 0;
        }
        let set = self.entries.entry(key.clone()).or_default();
        let before = set.len();
        set.extend(points.iter().copied());
        (set.len() - before) as u64
    }

    pub fn contains(&self, m: MutantId, key: &CallKey) -> bool {
        match self.point(m) {
            Some(p) => self.entries.get(key).is_some_and(|s| s.contains(&p)),
            None => false,
        }
    }

    /// Points recorded for `key`.
    pub fn points(&self, key: &CallKey) -> Option<&BTreeSet<u32>> {
        self.entries.get(key)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }
}

/// Memo cache plus mutation cache with a shared lifecycle.
#[derive(Clone, Debug)]
pub struct Memo {
    pub enabled: bool,
    entries: HashMap<CallKey, MemoEntry>,
    mutations: MutationCache,
    pub stats: MemoStats,
}

impl Memo {
    pub fn new(enabled: bool, mutant_point: Arc<[u32]>) -> Self {
        Memo { enabled, entries: HashMap::new(), mutations: MutationCache::new(mutant_point), stats: MemoStats::default() }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn mutations(&self) -> &MutationCache {
        &self.mutations
    }

    pub fn record_points(&mut self, key: &CallKey, points: &BTreeSet<u32>) -> u64 {
        if !self.enabled {
            return 0;
        }
        self.mutations.record_points(key, points)
    }

    /// Entry usable by mutant `m`: present, and `m`'s mutation did not run inside the call.
    pub fn memo_lookup(&self, key: &CallKey, m: MutantId) -> Option<&MemoEntry> {
        if !self.enabled {
            return None;
        }
        let entry = self.entries.get(key)?;
        if self.mutations.contains(m, key) {
            return None;
        }
        Some(entry)
    }

    /// Stores what mutant `m` returned for `key`. Skipped when `m`'s mutation
    /// ran inside the call or the key is already present. Returns whether it stored.
    pub fn memo_store_on_return(&mut self, key: CallKey, m: MutantId, entry: MemoEntry) -> bool {
        if !self.enabled || self.mutations.contains(m, &key) || self.entries.contains_key(&key) {
            return false;
        }
        self.entries.insert(key, entry);
        self.stats.stores += 1;
        true
    }

    /// Empties both caches once no diverged mutant awaits merge-back.
    pub fn clear_if_all_merged(&mut self, unmerged: usize) -> bool {
        if unmerged > 0 || (self.entries.is_empty() && self.mutations.is_empty()) {
            return false;
        }
        self.entries.clear();
        self.mutations.clear();
        self.stats.clears += 1;
        true
    }
}

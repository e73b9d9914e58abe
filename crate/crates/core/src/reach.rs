//! Membership in slices `L(q^ℓ)` through cached reachable-state sets.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::nfa::{Nfa, StateId};
use crate::stateset::StateSet;
use crate::word::Word;

/// Maps a word to the set of states reachable from the initial state by
/// reading it. Safe to share between threads.
#[derive(Debug, Default)]
pub struct ReachCache {
    map: RwLock<HashMap<Word, StateSet>>,
}

impl ReachCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, w: &Word) -> Option<StateSet> {
        self.map.read().expect("cache lock").get(w).cloned()
    }

    pub fn insert(&self, w: Word, set: StateSet) {
        self.map.write().expect("cache lock").insert(w, set);
    }
}

/// Reachable states without caching.
pub fn reach_uncached(a: &Nfa, symbols: &[u8]) -> StateSet {
    symbols
        .iter()
        .fold(a.initial_set(), |set, &b| a.step(&set, b))
}

/// States reachable from the initial state by reading `w`. The result is
/// stored in `cache`.
pub fn reach_states(a: &Nfa, w: &Word, cache: &ReachCache) -> StateSet {
    if let Some(hit) = cache.get(w) {
        return hit;
    }
    let set = reach_uncached(a, w.symbols());
    cache.insert(w.clone(), set.clone());
    set
}

/// `w ∈ L(q^ℓ)`.
pub fn member(a: &Nfa, q: StateId, level: usize, w: &Word, cache: &ReachCache) -> bool {
    w.len() == level && reach_states(a, w, cache).contains(q)
}

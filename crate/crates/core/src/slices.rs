//! Emptiness of the slices `L(q^ℓ)` of the unrolled automaton, and
//! deterministic witness words.
//!
//! The unrolled automaton is never materialized: the level-`ℓ` copy of `q`
//! has the level-`ℓ-1` copies of `pred(q, b)` as its `b`-predecessors.

use crate::nfa::{Nfa, StateId, Symbol};
use crate::stateset::StateSet;
use crate::word::Word;

/// `nonempty[ℓ]` holds the states `q` with `L(q^ℓ) ≠ ∅`, for `ℓ` in `0..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceTable {
    levels: Vec<StateSet>,
}

impl SliceTable {
    /// Forward reachability DP over levels `0..=n`.
    pub fn new(a: &Nfa, n: usize) -> Self {
        let mut levels = Vec::with_capacity(n + 1);
        let mut current = a.initial_set();
        levels.push(current.clone());
        for _ in 0..n {
            let mut next = a.empty_set();
            for b in a.symbols() {
                next.union_with(&a.step(&current, b));
            }
            levels.push(next.clone());
            current = next;
        }
        Self { levels }
    }

    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn is_nonempty(&self, q: StateId, level: usize) -> bool {
        self.levels.get(level).is_some_and(|s| s.contains(q))
    }

    pub fn level(&self, level: usize) -> &StateSet {
        &self.levels[level]
    }

    /// True when some accepting state has a nonempty slice at level `n`.
    pub fn language_nonempty(&self, a: &Nfa) -> bool {
        self.levels
            .last()
            .is_some_and(|s| s.intersects(a.accepting_set()))
    }
}

/// Lexicographically least word of `∪_{q ∈ targets} L(q^ℓ)`, if any.
///
/// A backward pass computes, for each remaining length `r`, the states that
/// reach `targets` in exactly `r` steps; a forward greedy pass then picks the
/// least symbol that keeps some run alive.
pub fn smallest_word_into(a: &Nfa, targets: &StateSet, level: usize) -> Option<Word> {
    let mut co = Vec::with_capacity(level + 1);
    co.push(targets.clone());
    for r in 1..=level {
        let mut prev = a.empty_set();
        for b in a.symbols() {
            prev.union_with(&a.step_back(&co[r - 1], b));
        }
        co.push(prev);
    }
    let mut current = a.initial_set();
    current.intersect_with(&co[level]);
    if current.is_empty() {
        return None;
    }
    let mut symbols: Vec<Symbol> = Vec::with_capacity(level);
    for pos in 1..=level {
        let alive = &co[level - pos];
        let (b, next) = a
            .symbols()
            .find_map(|b| {
                let mut next = a.step(&current, b);
                next.intersect_with(alive);
                (!next.is_empty()).then_some((b, next))
            })
            .expect("co-reachability guarantees a continuation");
        symbols.push(b);
        current = next;
    }
    Some(Word::new(symbols))
}

/// Lexicographically least word of `L(q^ℓ)`, or `None` when the slice is empty.
pub fn smallest_word(a: &Nfa, q: StateId, level: usize) -> Option<Word> {
    smallest_word_into(a, &StateSet::singleton(a.num_states(), q), level)
}

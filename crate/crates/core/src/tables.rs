//! Per-slice size estimates `N(q^ℓ)` and sample stores `S(q^ℓ)`.

use crate::nfa::{Nfa, StateId};
use crate::reach::reach_uncached;
use crate::scalar::Scalar;
use crate::stateset::StateSet;
use crate::word::Word;

/// A stored word together with every state it reaches from the initial
/// state, so membership in any slice of its level is a bit test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub word: Word,
    pub reach: StateSet,
}

impl Sample {
    pub fn new(a: &Nfa, word: Word) -> Self {
        let reach = reach_uncached(a, word.symbols());
        Self { word, reach }
    }

    #[inline]
    pub fn reaches(&self, q: StateId) -> bool {
        self.reach.contains(q)
    }
}

/// `N(q^ℓ)` for levels `0..levels()`, one row per level.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateTable<S> {
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> EstimateTable<S> {
    pub fn new() -> Self {
        Self { rows: Vec::new() }
    }

    /// Exact `|L(q^ℓ)|` rows, e.g. from the determinized oracle.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        Self { rows }
    }

    pub fn levels(&self) -> usize {
        self.rows.len()
    }

    pub fn push_level(&mut self, row: Vec<S>) {
        self.rows.push(row);
    }

    pub fn get(&self, q: StateId, level: usize) -> &S {
        &self.rows[level][q as usize]
    }

    pub fn row(&self, level: usize) -> &[S] {
        &self.rows[level]
    }
}

impl<S: Scalar> Default for EstimateTable<S> {
    fn default() -> Self {
        Self::new()
    }
}

/// `S(q^ℓ)` and the pad count `α_{q^ℓ}` for levels `0..levels()`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleStore {
    rows: Vec<Vec<Vec<Sample>>>,
    pads: Vec<Vec<usize>>,
}

impl SampleStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn levels(&self) -> usize {
        self.rows.len()
    }

    pub fn push_level(&mut self, stores: Vec<Vec<Sample>>, pads: Vec<usize>) {
        assert_eq!(stores.len(), pads.len());
        self.rows.push(stores);
        self.pads.push(pads);
    }

    pub fn get(&self, q: StateId, level: usize) -> &[Sample] {
        &self.rows[level][q as usize]
    }

    pub fn pads(&self, q: StateId, level: usize) -> usize {
        self.pads[level][q as usize]
    }

    pub fn total_pads(&self) -> usize {
        self.pads.iter().flatten().sum()
    }
}

//! Exact counters and samplers used as ground truth.
//!
//! Two counters are provided and kept independent of each other:
//! [`brute_force_count`] enumerates every word of the target length, while
//! [`determinized_count`] runs a counting DP over the subsets of states
//! reached (the on-the-fly subset construction).

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use crate::nfa::{Nfa, StateId, Symbol};
use crate::stateset::StateSet;
use crate::word::Word;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("enumeration budget exceeded: {needed} > {budget}")]
    BudgetExceeded { needed: String, budget: String },
    #[error("slice L({state}^{level}) is empty")]
    EmptySlice { state: StateId, level: usize },
}

/// Limits for the exact oracles. Exceeding a limit is an error, never a
/// silent truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of words `σ^n` an enumeration may visit.
    pub max_words: u64,
    /// Maximum state count for subset construction (at most `2^m` subsets).
    pub max_subset_states: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_words: 1 << 24,
            max_subset_states: 20,
        }
    }
}

impl Budget {
    fn check_words(&self, sigma: usize, len: usize) -> Result<(), OracleError> {
        let needed = BigUint::from(sigma).pow(len as u32);
        if needed > BigUint::from(self.max_words) {
            return Err(OracleError::BudgetExceeded {
                needed: format!("{sigma}^{len} words"),
                budget: format!("{} words", self.max_words),
            });
        }
        Ok(())
    }
}

// Depth-first walk over all words of length `len`, in lexicographic order,
// carrying the reachable set. Calls `visit` on each complete word.
fn for_each_word(a: &Nfa, len: usize, mut visit: impl FnMut(&[Symbol], &StateSet)) {
    let sigma = a.sigma();
    let mut word: Vec<Symbol> = Vec::with_capacity(len);
    let mut sets = vec![a.initial_set()];
    // next symbol to try at each depth
    let mut next: Vec<usize> = vec![0];
    loop {
        let depth = word.len();
        if depth == len {
            visit(&word, &sets[depth]);
            if depth == 0 {
                return;
            }
            word.pop();
            sets.pop();
            next.pop();
            continue;
        }
        let b = next[depth];
        if b == sigma {
            if depth == 0 {
                return;
            }
            word.pop();
            sets.pop();
            next.pop();
            continue;
        }
        next[depth] += 1;
        let s = a.step(&sets[depth], b as Symbol);
        word.push(b as Symbol);
        sets.push(s);
        next.push(0);
    }
}

/// `|L(A_n)|` by enumerating all `σ^n` words.
pub fn brute_force_count(a: &Nfa, n: usize, budget: &Budget) -> Result<BigUint, OracleError> {
    budget.check_words(a.sigma(), n)?;
    let mut count: u64 = 0;
    for_each_word(a, n, |_, set| {
        if set.intersects(a.accepting_set()) {
            count += 1;
        }
    });
    Ok(BigUint::from(count))
}

/// Result of the subset-construction counting DP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterminizedCounts {
    /// `|L(A_n)|`.
    pub total: BigUint,
    /// `per_slice[ℓ][q] = |L(q^ℓ)|` for `ℓ` in `0..=n`.
    pub per_slice: Vec<Vec<BigUint>>,
}

impl DeterminizedCounts {
    pub fn slice(&self, q: StateId, level: usize) -> &BigUint {
        &self.per_slice[level][q as usize]
    }
}

/// Exact counts by a DP over reached subsets: the number of words of length
/// `ℓ` whose reachable set is exactly `S`, for every `S`.
///
/// `|L(q^ℓ)|` is the sum of the counts of subsets containing `q`, and
/// `|L(A_n)|` the sum over subsets meeting the accepting set.
pub fn determinized_count(
    a: &Nfa,
    n: usize,
    budget: &Budget,
) -> Result<DeterminizedCounts, OracleError> {
    if a.num_states() > budget.max_subset_states {
        return Err(OracleError::BudgetExceeded {
            needed: format!("2^{} subsets", a.num_states()),
            budget: format!("2^{} subsets", budget.max_subset_states),
        });
    }
    let m = a.num_states();
    let mut layer: HashMap<StateSet, BigUint> = HashMap::new();
    layer.insert(a.initial_set(), BigUint::one());
    let mut per_slice = Vec::with_capacity(n + 1);
    let tally = |layer: &HashMap<StateSet, BigUint>| {
        let mut row = vec![BigUint::zero(); m];
        for (set, c) in layer {
            for q in set.iter() {
                row[q as usize] += c;
            }
        }
        row
    };
    per_slice.push(tally(&layer));
    for _ in 0..n {
        let mut next: HashMap<StateSet, BigUint> = HashMap::new();
        for (set, c) in &layer {
            for b in a.symbols() {
                let s = a.step(set, b);
                if !s.is_empty() {
                    *next.entry(s).or_default() += c;
                }
            }
        }
        layer = next;
        per_slice.push(tally(&layer));
    }
    let total = layer
        .iter()
        .filter(|(set, _)| set.intersects(a.accepting_set()))
        .map(|(_, c)| c)
        .sum();
    Ok(DeterminizedCounts { total, per_slice })
}

/// Members of `L(q^ℓ)` in lexicographic order.
pub fn enumerate_slice(
    a: &Nfa,
    q: StateId,
    level: usize,
    budget: &Budget,
) -> Result<Vec<Word>, OracleError> {
    budget.check_words(a.sigma(), level)?;
    let mut out = Vec::new();
    for_each_word(a, level, |w, set| {
        if set.contains(q) {
            out.push(Word::from(w));
        }
    });
    Ok(out)
}

/// Members of `L(A_n)` in lexicographic order.
pub fn enumerate_language(a: &Nfa, n: usize, budget: &Budget) -> Result<Vec<Word>, OracleError> {
    budget.check_words(a.sigma(), n)?;
    let mut out = Vec::new();
    for_each_word(a, n, |w, set| {
        if set.intersects(a.accepting_set()) {
            out.push(Word::from(w));
        }
    });
    Ok(out)
}

/// Exactly uniform sampler over a pre-enumerated slice.
#[derive(Debug, Clone)]
pub struct UniformSlice {
    words: Vec<Word>,
}

impl UniformSlice {
    pub fn new(a: &Nfa, q: StateId, level: usize, budget: &Budget) -> Result<Self, OracleError> {
        let words = enumerate_slice(a, q, level, budget)?;
        if words.is_empty() {
            return Err(OracleError::EmptySlice { state: q, level });
        }
        Ok(Self { words })
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Word {
        &self.words[rng.gen_range(0..self.words.len())]
    }
}

/// One exactly uniform draw from `L(q^ℓ)`.
pub fn uniform_exact_sample<R: Rng + ?Sized>(
    a: &Nfa,
    q: StateId,
    level: usize,
    budget: &Budget,
    rng: &mut R,
) -> Result<Word, OracleError> {
    Ok(UniformSlice::new(a, q, level, budget)?.sample(rng).clone())
}

/// Occurrence counts of sampled words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EmpiricalDist {
    counts: BTreeMap<Word, u64>,
    total: u64,
}

impl EmpiricalDist {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, w: Word) {
        *self.counts.entry(w).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, w: &Word) -> u64 {
        self.counts.get(w).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, u64)> {
        self.counts.iter().map(|(w, &c)| (w, c))
    }
}

impl FromIterator<Word> for EmpiricalDist {
    fn from_iter<T: IntoIterator<Item = Word>>(iter: T) -> Self {
        let mut d = Self::new();
        for w in iter {
            d.add(w);
        }
        d
    }
}

/// Total variation distance between the empirical distribution and the
/// uniform distribution on `support`, in half-L1 form. Mass outside the
/// support counts fully. An empty sample has distance 1.
pub fn tv_distance(p: &EmpiricalDist, support: &[Word]) -> BigRational {
    assert!(!support.is_empty(), "support must be nonempty");
    if p.total() == 0 {
        return BigRational::one();
    }
    let total = BigInt::from(p.total());
    let k = BigInt::from(support.len());
    let uniform = BigRational::new(BigInt::one(), k);
    let mut sum = BigRational::zero();
    let mut in_support = 0u64;
    for w in support {
        let c = p.count(w);
        in_support += c;
        let freq = BigRational::new(BigInt::from(c), total.clone());
        let diff = if freq > uniform {
            freq - &uniform
        } else {
            &uniform - freq
        };
        sum += diff;
    }
    sum += BigRational::new(BigInt::from(p.total() - in_support), total);
    sum / BigRational::from_integer(BigInt::from(2))
}

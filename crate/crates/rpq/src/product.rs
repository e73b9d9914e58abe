//! Synchronous product of two NFAs over the same alphabet.

use std::collections::HashMap;

use sharpnfa::{Nfa, StateId};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("alphabet sizes differ: {left} and {right}")]
pub struct AlphabetMismatch {
    pub left: usize,
    pub right: usize,
}

/// Product automaton with `L = L(a) ∩ L(b)`.
///
/// States are the pairs reachable from the pair of initial states, numbered
/// in breadth-first order, so there are at most `|a|·|b|` of them. When no
/// accepting pair is reachable one extra unreachable accepting state is
/// added, which keeps the accepting set nonempty and the language empty.
pub fn product(a: &Nfa, b: &Nfa) -> Result<Nfa, AlphabetMismatch> {
    if a.sigma() != b.sigma() {
        return Err(AlphabetMismatch {
            left: a.sigma(),
            right: b.sigma(),
        });
    }
    let mut index: HashMap<(StateId, StateId), usize> = HashMap::new();
    let mut pairs = vec![(a.initial(), b.initial())];
    index.insert(pairs[0], 0);
    let mut transitions = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let (p, q) = pairs[i];
        for c in a.symbols() {
            for &p2 in a.successors(p, c) {
                for &q2 in b.successors(q, c) {
                    let next = *index.entry((p2, q2)).or_insert_with(|| {
                        pairs.push((p2, q2));
                        pairs.len() - 1
                    });
                    transitions.push((i, c as usize, next));
                }
            }
        }
        i += 1;
    }
    let mut accepting: Vec<usize> = pairs
        .iter()
        .enumerate()
        .filter(|(_, &(p, q))| a.is_accepting(p) && b.is_accepting(q))
        .map(|(i, _)| i)
        .collect();
    let mut states = pairs.len();
    if accepting.is_empty() {
        accepting.push(states);
        states += 1;
    }
    Ok(Nfa::new(states, a.sigma(), 0, accepting, transitions).expect("product is well formed"))
}

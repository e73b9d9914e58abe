use std::fmt;

use smallvec::SmallVec;

use crate::nfa::StateId;

/// A set of automaton states, stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct StateSet {
    blocks: SmallVec<[u64; 2]>,
}

impl StateSet {
    pub fn empty(num_states: usize) -> Self {
        Self {
            blocks: SmallVec::from_elem(0, num_states.div_ceil(64)),
        }
    }

    pub fn singleton(num_states: usize, q: StateId) -> Self {
        let mut s = Self::empty(num_states);
        s.insert(q);
        s
    }

    pub fn full(num_states: usize) -> Self {
        let mut s = Self::empty(num_states);
        for q in 0..num_states {
            s.insert(q as StateId);
        }
        s
    }

    pub fn from_states(num_states: usize, states: impl IntoIterator<Item = StateId>) -> Self {
        let mut s = Self::empty(num_states);
        for q in states {
            s.insert(q);
        }
        s
    }

    #[inline]
    pub fn insert(&mut self, q: StateId) {
        let q = q as usize;
        self.blocks[q / 64] |= 1 << (q % 64);
    }

    #[inline]
    pub fn contains(&self, q: StateId) -> bool {
        let q = q as usize;
        self.blocks
            .get(q / 64)
            .is_some_and(|b| b & (1 << (q % 64)) != 0)
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn union_with(&mut self, other: &StateSet) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &StateSet) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a &= b;
        }
    }

    pub fn intersects(&self, other: &StateSet) -> bool {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .any(|(a, b)| a & b != 0)
    }

    /// States in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        self.blocks.iter().enumerate().flat_map(|(i, &block)| {
            let mut bits = block;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros();
                bits &= bits - 1;
                Some((i * 64 + tz as usize) as StateId)
            })
        })
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_operations() {
        let mut a = StateSet::from_states(70, [0, 3, 65]);
        let b = StateSet::from_states(70, [3, 69]);
        assert_eq!(a.len(), 3);
        assert!(a.contains(65) && !a.contains(64));
        assert!(a.intersects(&b));
        a.union_with(&b);
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 3, 65, 69]);
        a.intersect_with(&b);
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![3, 69]);
        assert!(StateSet::empty(5).is_empty());
        assert_eq!(StateSet::full(5).len(), 5);
    }
}

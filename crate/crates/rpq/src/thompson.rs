//! Thompson construction and ε-elimination.

use std::collections::{BTreeSet, VecDeque};

use sharpnfa::{Nfa, StateId, Symbol};

use crate::regex::Regex;

/// NFA with separate ε-edges and a single accepting state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsNfa {
    pub num_states: usize,
    pub sigma: usize,
    pub initial: StateId,
    pub accepting: StateId,
    pub transitions: Vec<(StateId, Symbol, StateId)>,
    pub epsilon: Vec<(StateId, StateId)>,
}

struct Builder {
    count: usize,
    transitions: Vec<(StateId, Symbol, StateId)>,
    epsilon: Vec<(StateId, StateId)>,
}

impl Builder {
    fn state(&mut self) -> StateId {
        self.count += 1;
        (self.count - 1) as StateId
    }

    // fragment with one entry and one exit
    fn build(&mut self, re: &Regex) -> (StateId, StateId) {
        match re {
            Regex::Empty => {
                let (s, t) = (self.state(), self.state());
                self.epsilon.push((s, t));
                (s, t)
            }
            Regex::Lit(b) => {
                let (s, t) = (self.state(), self.state());
                self.transitions.push((s, *b, t));
                (s, t)
            }
            Regex::Concat(a, b) => {
                let (s1, t1) = self.build(a);
                let (s2, t2) = self.build(b);
                self.epsilon.push((t1, s2));
                (s1, t2)
            }
            Regex::Alt(a, b) => {
                let s = self.state();
                let (s1, t1) = self.build(a);
                let (s2, t2) = self.build(b);
                let t = self.state();
                self.epsilon.extend([(s, s1), (s, s2), (t1, t), (t2, t)]);
                (s, t)
            }
            Regex::Star(a) | Regex::Plus(a) | Regex::Opt(a) => {
                let s = self.state();
                let (s1, t1) = self.build(a);
                let t = self.state();
                self.epsilon.extend([(s, s1), (t1, t)]);
                if !matches!(re, Regex::Plus(_)) {
                    self.epsilon.push((s, t));
                }
                if !matches!(re, Regex::Opt(_)) {
                    self.epsilon.push((t1, s1));
                }
                (s, t)
            }
        }
    }
}

/// Thompson's construction over an alphabet of size `sigma`.
pub fn thompson(re: &Regex, sigma: usize) -> EpsNfa {
    let mut b = Builder {
        count: 0,
        transitions: Vec::new(),
        epsilon: Vec::new(),
    };
    let (initial, accepting) = b.build(re);
    EpsNfa {
        num_states: b.count,
        sigma,
        initial,
        accepting,
        transitions: b.transitions,
        epsilon: b.epsilon,
    }
}

impl EpsNfa {
    fn closure(&self, from: StateId) -> BTreeSet<StateId> {
        let mut seen = BTreeSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(p) = queue.pop_front() {
            for &(a, b) in &self.epsilon {
                if a == p && seen.insert(b) {
                    queue.push_back(b);
                }
            }
        }
        seen
    }
}

/// ε-free NFA with the same language: `p —c→ r` whenever some state in the
/// ε-closure of `p` has a `c`-edge to `r`, and `p` accepts when its closure
/// holds the accepting state. States unreachable from the initial state are
/// dropped and the rest renumbered in discovery order.
pub fn eliminate_epsilon(e: &EpsNfa) -> Nfa {
    let closures: Vec<BTreeSet<StateId>> =
        (0..e.num_states as StateId).map(|p| e.closure(p)).collect();
    let mut edges: BTreeSet<(StateId, Symbol, StateId)> = BTreeSet::new();
    for (p, cl) in closures.iter().enumerate() {
        for &(q, c, r) in &e.transitions {
            if cl.contains(&q) {
                edges.insert((p as StateId, c, r));
            }
        }
    }
    let mut index = vec![None; e.num_states];
    let mut order = vec![e.initial];
    index[e.initial as usize] = Some(0usize);
    let mut i = 0;
    while i < order.len() {
        let p = order[i];
        for &(_, _, r) in edges.range((p, 0, 0)..=(p, Symbol::MAX, StateId::MAX)) {
            if index[r as usize].is_none() {
                index[r as usize] = Some(order.len());
                order.push(r);
            }
        }
        i += 1;
    }
    let accepting = order
        .iter()
        .enumerate()
        .filter(|(_, &p)| closures[p as usize].contains(&e.accepting))
        .map(|(i, _)| i);
    let transitions = edges
        .iter()
        .filter_map(|&(p, c, r)| Some((index[p as usize]?, c as usize, index[r as usize]?)));
    Nfa::new(order.len(), e.sigma, 0, accepting, transitions)
        .expect("ε-elimination yields a valid automaton")
}

/// Regex to ε-free NFA.
pub fn compile_regex(re: &Regex, sigma: usize) -> Nfa {
    eliminate_epsilon(&thompson(re, sigma))
}

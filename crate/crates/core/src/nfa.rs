//! Nondeterministic finite automata without ε-transitions.
//!
//! Text format, one item per line, `#` starts a comment:
//!
//! ```text
//! nfa m=2 sigma=2 initial=0
//! accept 1
//! t 0 0 0
//! t 0 1 0
//! t 0 1 1
//! ```
//!
//! The same fields are accepted as a JSON object
//! (`{"m":2,"sigma":2,"initial":0,"accept":[1],"transitions":[[0,0,0],...]}`);
//! [`Nfa::parse`] picks the format from the first non-blank character.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stateset::StateSet;

pub type StateId = u32;
pub type Symbol = u8;

pub const MAX_ALPHABET: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NfaError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid automaton: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> NfaError {
    NfaError::Invalid(msg.into())
}

/// An NFA `(Q, Σ, Δ, initial, F)` with `Q = 0..m` and `Σ = 0..sigma`.
#[derive(Clone, PartialEq, Eq)]
pub struct Nfa {
    num_states: usize,
    sigma: usize,
    initial: StateId,
    accepting: Vec<StateId>,
    transitions: Vec<(StateId, Symbol, StateId)>,
    accepting_set: StateSet,
    // indexed by q * sigma + b
    pred: Vec<Vec<StateId>>,
    succ: Vec<Vec<StateId>>,
}

impl std::fmt::Debug for Nfa {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Nfa")
            .field("m", &self.num_states)
            .field("sigma", &self.sigma)
            .field("initial", &self.initial)
            .field("accepting", &self.accepting)
            .field("transitions", &self.transitions)
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NfaDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    format: Option<u32>,
    m: usize,
    sigma: usize,
    initial: usize,
    accept: Vec<usize>,
    transitions: Vec<[usize; 3]>,
}

impl Nfa {
    /// Builds and validates an automaton. Duplicate transitions or accepting
    /// states are rejected.
    pub fn new(
        num_states: usize,
        sigma: usize,
        initial: usize,
        accepting: impl IntoIterator<Item = usize>,
        transitions: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<Self, NfaError> {
        Self::build(num_states, sigma, initial, accepting, transitions, true)
    }

    /// Like [`Nfa::new`] but treats the inputs as relations, collapsing
    /// duplicates.
    pub fn from_relation(
        num_states: usize,
        sigma: usize,
        initial: usize,
        accepting: impl IntoIterator<Item = usize>,
        transitions: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<Self, NfaError> {
        Self::build(num_states, sigma, initial, accepting, transitions, false)
    }

    fn build(
        num_states: usize,
        sigma: usize,
        initial: usize,
        accepting: impl IntoIterator<Item = usize>,
        transitions: impl IntoIterator<Item = (usize, usize, usize)>,
        strict: bool,
    ) -> Result<Self, NfaError> {
        if num_states == 0 {
            return Err(invalid("automaton needs at least one state"));
        }
        if num_states > StateId::MAX as usize {
            return Err(invalid("too many states"));
        }
        if !(2..=MAX_ALPHABET).contains(&sigma) {
            return Err(invalid(format!(
                "alphabet size {sigma} outside 2..={MAX_ALPHABET}"
            )));
        }
        if initial >= num_states {
            return Err(invalid(format!("initial state {initial} out of range")));
        }
        let mut acc = BTreeSet::new();
        for q in accepting {
            if q >= num_states {
                return Err(invalid(format!("accepting state {q}: state out of range")));
            }
            if !acc.insert(q as StateId) && strict {
                return Err(invalid(format!("duplicate accepting state {q}")));
            }
        }
        if acc.is_empty() {
            return Err(invalid("accepting set must be nonempty"));
        }
        let mut delta = BTreeSet::new();
        for (p, b, q) in transitions {
            if p >= num_states || q >= num_states {
                return Err(invalid(format!(
                    "transition {p} {b} {q}: state out of range"
                )));
            }
            if b >= sigma {
                return Err(invalid(format!(
                    "transition {p} {b} {q}: symbol out of range"
                )));
            }
            if !delta.insert((p as StateId, b as Symbol, q as StateId)) && strict {
                return Err(invalid(format!("duplicate transition {p} {b} {q}")));
            }
        }
        let mut pred = vec![Vec::new(); num_states * sigma];
        let mut succ = vec![Vec::new(); num_states * sigma];
        for &(p, b, q) in &delta {
            pred[q as usize * sigma + b as usize].push(p);
            succ[p as usize * sigma + b as usize].push(q);
        }
        let accepting: Vec<StateId> = acc.into_iter().collect();
        Ok(Self {
            num_states,
            sigma,
            initial: initial as StateId,
            accepting_set: StateSet::from_states(num_states, accepting.iter().copied()),
            accepting,
            transitions: delta.into_iter().collect(),
            pred,
            succ,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn accepting(&self) -> &[StateId] {
        &self.accepting
    }

    pub fn accepting_set(&self) -> &StateSet {
        &self.accepting_set
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting_set.contains(q)
    }

    /// Transitions in sorted order.
    pub fn transitions(&self) -> &[(StateId, Symbol, StateId)] {
        &self.transitions
    }

    /// `{p : (p, b, q) ∈ Δ}`, sorted.
    pub fn predecessors(&self, q: StateId, b: Symbol) -> &[StateId] {
        &self.pred[q as usize * self.sigma + b as usize]
    }

    /// `{q : (p, b, q) ∈ Δ}`, sorted.
    pub fn successors(&self, p: StateId, b: Symbol) -> &[StateId] {
        &self.succ[p as usize * self.sigma + b as usize]
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        (0..self.sigma).map(|b| b as Symbol)
    }

    pub fn empty_set(&self) -> StateSet {
        StateSet::empty(self.num_states)
    }

    pub fn initial_set(&self) -> StateSet {
        StateSet::singleton(self.num_states, self.initial)
    }

    /// One-step image of `from` under `b`.
    pub fn step(&self, from: &StateSet, b: Symbol) -> StateSet {
        let mut out = self.empty_set();
        for p in from.iter() {
            for &q in self.successors(p, b) {
                out.insert(q);
            }
        }
        out
    }

    /// Union of the `b`-predecessors of every state in `of`.
    pub fn step_back(&self, of: &StateSet, b: Symbol) -> StateSet {
        let mut out = self.empty_set();
        for q in of.iter() {
            for &p in self.predecessors(q, b) {
                out.insert(p);
            }
        }
        out
    }

    /// Parses either the line format or the JSON rendering.
    pub fn parse(text: &str) -> Result<Self, NfaError> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_text(text)
        }
    }

    pub fn from_json(text: &str) -> Result<Self, NfaError> {
        let doc: NfaDoc = serde_json::from_str(text).map_err(|e| NfaError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if let Some(v) = doc.format {
            if v != 1 {
                return Err(invalid(format!("unsupported format version {v}")));
            }
        }
        Self::new(
            doc.m,
            doc.sigma,
            doc.initial,
            doc.accept,
            doc.transitions.into_iter().map(|[p, b, q]| (p, b, q)),
        )
    }

    pub fn from_text(text: &str) -> Result<Self, NfaError> {
        let mut header: Option<(usize, usize, usize)> = None;
        let mut accepting = Vec::new();
        let mut transitions = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("");
            let tokens = tokenize(line);
            let Some(&(col, keyword)) = tokens.first() else {
                continue;
            };
            let syntax = |column: usize, message: String| NfaError::Syntax {
                line: line_no,
                column,
                message,
            };
            match keyword {
                "nfa" => {
                    if header.is_some() {
                        return Err(syntax(col, "duplicate header".into()));
                    }
                    let mut m = None;
                    let mut sigma = None;
                    let mut initial = None;
                    for &(c, tok) in &tokens[1..] {
                        let (key, value) = tok.split_once('=').ok_or_else(|| {
                            syntax(c, format!("expected key=value, found `{tok}`"))
                        })?;
                        let value: usize = value.parse().map_err(|_| {
                            syntax(c + key.len() + 1, format!("bad integer `{value}`"))
                        })?;
                        let slot = match key {
                            "m" => &mut m,
                            "sigma" => &mut sigma,
                            "initial" => &mut initial,
                            _ => return Err(syntax(c, format!("unknown header field `{key}`"))),
                        };
                        if slot.replace(value).is_some() {
                            return Err(syntax(c, format!("repeated header field `{key}`")));
                        }
                    }
                    match (m, sigma, initial) {
                        (Some(m), Some(s), Some(i)) => header = Some((m, s, i)),
                        _ => {
                            return Err(syntax(col, "header needs m=, sigma= and initial=".into()))
                        }
                    }
                }
                "accept" => {
                    if header.is_none() {
                        return Err(syntax(col, "`accept` before header".into()));
                    }
                    for &(c, tok) in &tokens[1..] {
                        accepting.push(
                            tok.parse::<usize>()
                                .map_err(|_| syntax(c, format!("bad state id `{tok}`")))?,
                        );
                    }
                }
                "t" => {
                    if header.is_none() {
                        return Err(syntax(col, "transition before header".into()));
                    }
                    if tokens.len() != 4 {
                        return Err(syntax(col, "transition needs `t <src> <sym> <dst>`".into()));
                    }
                    let mut vals = [0usize; 3];
                    for (slot, &(c, tok)) in vals.iter_mut().zip(&tokens[1..]) {
                        *slot = tok
                            .parse()
                            .map_err(|_| syntax(c, format!("bad integer `{tok}`")))?;
                    }
                    transitions.push((vals[0], vals[1], vals[2]));
                }
                other => return Err(syntax(col, format!("unknown directive `{other}`"))),
            }
        }
        let (m, sigma, initial) = header.ok_or_else(|| NfaError::Syntax {
            line: 1,
            column: 1,
            message: "missing `nfa` header".into(),
        })?;
        Self::new(m, sigma, initial, accepting, transitions)
    }

    /// Canonical line-format rendering; reparses to an identical automaton.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "nfa m={} sigma={} initial={}\naccept",
            self.num_states, self.sigma, self.initial
        );
        for q in &self.accepting {
            let _ = write!(out, " {q}");
        }
        out.push('\n');
        for (p, b, q) in &self.transitions {
            let _ = writeln!(out, "t {p} {b} {q}");
        }
        out
    }

    pub fn to_json(&self) -> String {
        let doc = NfaDoc {
            format: Some(1),
            m: self.num_states,
            sigma: self.sigma,
            initial: self.initial as usize,
            accept: self.accepting.iter().map(|&q| q as usize).collect(),
            transitions: self
                .transitions
                .iter()
                .map(|&(p, b, q)| [p as usize, b as usize, q as usize])
                .collect(),
        };
        serde_json::to_string(&doc).expect("serializable")
    }
}

// whitespace-separated tokens with 1-based columns
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

/// Automaton accepting every word over `0..sigma`.
pub fn all_strings(sigma: usize) -> Nfa {
    Nfa::new(1, sigma, 0, [0], (0..sigma).map(|b| (0, b, 0))).expect("valid")
}

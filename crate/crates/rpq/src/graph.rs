//! Edge-labeled directed graphs and their NFA view.

use std::collections::BTreeSet;

use sharpnfa::{Nfa, StateId, Symbol, MAX_ALPHABET};
use thiserror::Error;

use crate::regex::{Alphabet, AlphabetError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    nodes: usize,
    sigma: usize,
    edges: BTreeSet<(StateId, Symbol, StateId)>,
    alphabet: Alphabet,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("node {node} out of range for {nodes} nodes")]
    Node { node: usize, nodes: usize },
    #[error("symbol {symbol} out of range for sigma = {sigma}")]
    Symbol { symbol: usize, sigma: usize },
    #[error("sigma must lie in 2..={MAX_ALPHABET}, got {0}")]
    Sigma(usize),
    #[error("graph needs at least one node")]
    NoNodes,
}

impl LabeledGraph {
    /// Parallel edges with the same label collapse into one. Regex literals
    /// default to [`Alphabet::standard`].
    pub fn new(
        nodes: usize,
        sigma: usize,
        edges: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<Self, GraphError> {
        if nodes == 0 {
            return Err(GraphError::NoNodes);
        }
        if !(2..=MAX_ALPHABET).contains(&sigma) {
            return Err(GraphError::Sigma(sigma));
        }
        let mut set = BTreeSet::new();
        for (s, b, d) in edges {
            for node in [s, d] {
                if node >= nodes {
                    return Err(GraphError::Node { node, nodes });
                }
            }
            if b >= sigma {
                return Err(GraphError::Symbol { symbol: b, sigma });
            }
            set.insert((s as StateId, b as Symbol, d as StateId));
        }
        Ok(Self {
            nodes,
            sigma,
            edges: set,
            alphabet: Alphabet::standard(sigma),
        })
    }

    pub fn with_alphabet(mut self, alphabet: Alphabet) -> Self {
        self.alphabet = alphabet;
        self
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    pub fn edges(&self) -> impl Iterator<Item = (StateId, Symbol, StateId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Parses the line format
    ///
    /// ```text
    /// graph nodes=3 sigma=2
    /// alpha a 0
    /// e 0 0 1
    /// ```
    ///
    /// with `#` comments. Without `alpha` lines the standard alphabet is used.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        let mut alphas: Vec<(usize, usize, char, usize)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let tokens: Vec<(usize, &str)> = tokenize(content);
            let Some(&(col, head)) = tokens.first() else {
                continue;
            };
            let err = |column: usize, message: String| GraphError::Syntax {
                line,
                column,
                message,
            };
            let int = |k: usize| -> Result<usize, GraphError> {
                let &(c, t) = tokens
                    .get(k)
                    .ok_or_else(|| err(content.len() + 1, "missing field".into()))?;
                t.parse().map_err(|_| err(c, format!("bad integer `{t}`")))
            };
            match head {
                "graph" => {
                    if header.is_some() {
                        return Err(err(col, "duplicate header".into()));
                    }
                    let mut nodes = None;
                    let mut sigma = None;
                    for &(c, t) in &tokens[1..] {
                        let (key, value) = t
                            .split_once('=')
                            .ok_or_else(|| err(c, format!("expected key=value, got `{t}`")))?;
                        let v: usize = value
                            .parse()
                            .map_err(|_| err(c, format!("bad integer `{value}`")))?;
                        match key {
                            "nodes" => nodes = Some(v),
                            "sigma" => sigma = Some(v),
                            _ => return Err(err(c, format!("unknown key `{key}`"))),
                        }
                    }
                    match (nodes, sigma) {
                        (Some(n), Some(s)) => header = Some((n, s)),
                        _ => return Err(err(col, "header needs nodes= and sigma=".into())),
                    }
                }
                "e" | "alpha" if header.is_none() => {
                    return Err(err(col, "`graph` header must come first".into()));
                }
                "e" => {
                    if tokens.len() != 4 {
                        return Err(err(col, "expected `e <src> <sym> <dst>`".into()));
                    }
                    edges.push((int(1)?, int(2)?, int(3)?));
                }
                "alpha" => {
                    if tokens.len() != 3 {
                        return Err(err(col, "expected `alpha <char> <sym>`".into()));
                    }
                    let (c, t) = tokens[1];
                    let mut chars = t.chars();
                    let (Some(ch), None) = (chars.next(), chars.next()) else {
                        return Err(err(c, format!("expected one character, got `{t}`")));
                    };
                    alphas.push((line, c, ch, int(2)?));
                }
                other => return Err(err(col, format!("unknown directive `{other}`"))),
            }
        }
        let (nodes, sigma) = header.ok_or(GraphError::Syntax {
            line: 1,
            column: 1,
            message: "missing `graph` header".into(),
        })?;
        let mut g = Self::new(nodes, sigma, edges)?;
        if !alphas.is_empty() {
            let mut alphabet = Alphabet::empty(sigma);
            for (line, column, ch, sym) in alphas {
                alphabet
                    .insert(ch, sym)
                    .map_err(|e: AlphabetError| GraphError::Syntax {
                        line,
                        column,
                        message: e.to_string(),
                    })?;
            }
            g.alphabet = alphabet;
        }
        Ok(g)
    }
}

fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

/// States are nodes, transitions are edges, `u` initial, `{v}` accepting.
/// Its length-`n` language is the set of label words of `u → v` walks with
/// `n` edges.
pub fn graph_nfa(g: &LabeledGraph, u: usize, v: usize) -> Result<Nfa, GraphError> {
    for node in [u, v] {
        if node >= g.nodes {
            return Err(GraphError::Node {
                node,
                nodes: g.nodes,
            });
        }
    }
    let edges = g
        .edges()
        .map(|(s, b, d)| (s as usize, b as usize, d as usize));
    Ok(Nfa::new(g.nodes, g.sigma, u, [v], edges).expect("graph edges are validated"))
}

//! Regular path queries as NFA counting instances.
//!
//! A query asks for the label words of walks from `u` to `v` in an
//! edge-labeled graph that match a regex. The graph viewed as an NFA (`u`
//! initial, `v` accepting) is intersected with the compiled regex, and the
//! length-`n` language of the product is exactly the set of answers of
//! length `n`.
//!
//! Answers are distinct words. Two walks with the same label sequence count
//! once; the number of walks is not what is being estimated.

pub mod graph;
pub mod product;
pub mod regex;
pub mod thompson;

pub use graph::{graph_nfa, GraphError, LabeledGraph};
pub use product::{product, AlphabetMismatch};
pub use regex::{parse_regex, Alphabet, AlphabetError, Regex, RegexError};
pub use thompson::{compile_regex, eliminate_epsilon, thompson, EpsNfa};

use sharpnfa::{
    count, sample_accepted, CountConfig, FprasError, FprasResult, Nfa, SampledWords, Scalar,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RpqError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Regex(#[from] RegexError),
    #[error(transparent)]
    Alphabet(#[from] AlphabetMismatch),
    #[error(transparent)]
    Fpras(#[from] FprasError),
}

/// A compiled query and its pieces.
#[derive(Debug, Clone)]
pub struct Query {
    pub regex: Regex,
    pub graph_nfa: Nfa,
    pub regex_nfa: Nfa,
    pub product: Nfa,
}

/// Builds the product automaton for `(g, u, v, regex)`.
pub fn compile_query(g: &LabeledGraph, u: usize, v: usize, regex: &str) -> Result<Query, RpqError> {
    let regex = parse_regex(regex, g.alphabet())?;
    let graph_nfa = graph_nfa(g, u, v)?;
    let regex_nfa = compile_regex(&regex, g.sigma());
    let product = product(&graph_nfa, &regex_nfa)?;
    Ok(Query {
        regex,
        graph_nfa,
        regex_nfa,
        product,
    })
}

/// Estimates the number of length-`n` answers.
pub fn rpq_count<S: Scalar>(
    g: &LabeledGraph,
    u: usize,
    v: usize,
    regex: &str,
    n: usize,
    config: &CountConfig,
    seed: u64,
) -> Result<FprasResult<S>, RpqError> {
    let q = compile_query(g, u, v, regex)?;
    Ok(count(&q.product, n, config, seed)?)
}

/// Samples `samples` length-`n` answers.
#[allow(clippy::too_many_arguments)]
pub fn rpq_sample<S: Scalar>(
    g: &LabeledGraph,
    u: usize,
    v: usize,
    regex: &str,
    n: usize,
    samples: usize,
    config: &CountConfig,
    seed: u64,
) -> Result<SampledWords<S>, RpqError> {
    let q = compile_query(g, u, v, regex)?;
    Ok(sample_accepted(&q.product, n, samples, config, seed)?)
}

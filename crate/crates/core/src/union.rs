//! Karp–Luby style estimation of `|T_1 ∪ … ∪ T_k|`.
//!
//! Each set is given by a membership predicate, a sequence of (ideally
//! uniform) samples, and a size estimate `sz_i`. The estimator repeatedly
//! draws a set index `i` with probability `sz_i / Σ sz_j`, takes the next
//! sample of `T_i`, and counts the draws whose sample lies in no earlier set.
//! The count `Y` over `t` iterations yields `(Y / t) · Σ sz_j`.
//!
//! Sample sequences are read through cursors private to one call, starting at
//! position 0; the sequences themselves are never consumed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Picker, Scalar, Weighted};

/// How many iterations a call runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum IterationRule {
    /// `t = ⌈12·(1+ε_sz)²·m̂/ε²·ln(4/δ)⌉` and sample sequences of at least
    /// `thresh = ⌈24·(1+ε_sz)²/ε²·ln(4k/δ)⌉`.
    Formula,
    /// `t = min(formula, ⌈per_set·m̂⌉)`. Any set is then drawn fewer than
    /// `2·per_set` times in expectation, so sequences of length
    /// `min(thresh, 3·per_set)` suffice.
    Capped { per_set: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnionParams {
    pub epsilon: f64,
    pub delta: f64,
    /// Multiplicative slack of the input size estimates.
    pub eps_sz: f64,
    pub rule: IterationRule,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnionError {
    #[error("set {index} has {have} samples, at least {need} required")]
    ShortSamples {
        index: usize,
        have: usize,
        need: u64,
    },
    #[error("invalid union parameters: {0}")]
    BadParams(String),
}

/// Ceiling that ignores float noise of relative size below 1e-12.
pub(crate) fn ceil_count(x: f64) -> u64 {
    let nudged = x - x.abs() * 1e-12;
    nudged.ceil().max(0.0) as u64
}

impl UnionParams {
    pub fn new(epsilon: f64, delta: f64, eps_sz: f64) -> Self {
        Self {
            epsilon,
            delta,
            eps_sz,
            rule: IterationRule::Formula,
        }
    }

    pub fn with_rule(mut self, rule: IterationRule) -> Self {
        self.rule = rule;
        self
    }

    fn validate(&self) -> Result<(), UnionError> {
        let ok = self.epsilon > 0.0
            && self.delta > 0.0
            && self.delta < 4.0
            && self.eps_sz >= 0.0
            && self.epsilon.is_finite()
            && self.eps_sz.is_finite();
        if ok {
            Ok(())
        } else {
            Err(UnionError::BadParams(format!("{self:?}")))
        }
    }

    /// `⌈24·(1+ε_sz)²/ε²·ln(4k/δ)⌉` under [`IterationRule::Formula`].
    pub fn thresh_formula(&self, k: usize) -> u64 {
        let slack = (1.0 + self.eps_sz).powi(2);
        ceil_count(24.0 * slack / self.epsilon.powi(2) * (4.0 * k as f64 / self.delta).ln())
    }

    /// Minimum sample-sequence length for each set with positive size.
    pub fn thresh(&self, k: usize) -> u64 {
        let formula = self.thresh_formula(k);
        match self.rule {
            IterationRule::Formula => formula,
            IterationRule::Capped { per_set } => formula.min(3 * per_set),
        }
    }

    /// Iteration count `t` for a given `m̂ = ⌈Σ sz / max sz⌉`.
    pub fn iterations(&self, m_hat: u64) -> u64 {
        let slack = (1.0 + self.eps_sz).powi(2);
        let formula = ceil_count(
            12.0 * slack * m_hat as f64 / self.epsilon.powi(2) * (4.0 / self.delta).ln(),
        )
        .max(1);
        match self.rule {
            IterationRule::Formula => formula,
            IterationRule::Capped { per_set } => formula.min((per_set * m_hat).max(1)),
        }
    }
}

/// One input set: membership predicate, samples and size estimate.
pub struct SetHandle<'a, X, S, M> {
    pub membership: M,
    pub samples: &'a [X],
    pub size: S,
}

impl<'a, X, S, M> SetHandle<'a, X, S, M> {
    pub fn new(membership: M, samples: &'a [X], size: S) -> Self {
        Self {
            membership,
            samples,
            size,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnionOutcome<S> {
    pub estimate: S,
    /// Planned iteration count `t`.
    pub iterations: u64,
    /// Iterations actually run; below `iterations` only after an early break.
    pub completed: u64,
    pub hits: u64,
    pub early_break: bool,
}

impl<S: Scalar> UnionOutcome<S> {
    fn zero() -> Self {
        Self {
            estimate: S::zero(),
            iterations: 0,
            completed: 0,
            hits: 0,
            early_break: false,
        }
    }
}

/// Estimates the size of the union of the sets behind `handles`.
///
/// Handles with `sz = 0` are never drawn and may have no samples. If a
/// cursor runs past the end of its sequence the loop stops and the estimate
/// is still `(Y/t)·Σ sz` with the planned `t`.
pub fn app_union<X, S, M, R>(
    params: &UnionParams,
    handles: &[SetHandle<'_, X, S, M>],
    rng: &mut R,
) -> Result<UnionOutcome<S>, UnionError>
where
    S: Scalar,
    M: Fn(&X) -> bool,
    R: rand::Rng + ?Sized,
{
    params.validate()?;
    let k = handles.len();
    if k == 0 {
        return Ok(UnionOutcome::zero());
    }
    let need = params.thresh(k);
    for (index, h) in handles.iter().enumerate() {
        if h.size > S::zero() && (h.samples.len() as u64) < need {
            return Err(UnionError::ShortSamples {
                index,
                have: h.samples.len(),
                need,
            });
        }
    }
    Ok(run_union(params, handles, rng))
}

// The estimator loop proper; sample lengths are not checked here.
fn run_union<X, S, M, R>(
    params: &UnionParams,
    handles: &[SetHandle<'_, X, S, M>],
    rng: &mut R,
) -> UnionOutcome<S>
where
    S: Scalar,
    M: Fn(&X) -> bool,
    R: rand::Rng + ?Sized,
{
    let k = handles.len();
    let sizes: Vec<S> = handles.iter().map(|h| h.size.clone()).collect();
    let Some(Weighted {
        picker,
        total,
        m_hat,
    }) = S::weighted(&sizes)
    else {
        return UnionOutcome::zero();
    };
    let t = params.iterations(m_hat);

    let mut cursors = vec![0usize; k];
    let mut hits = 0u64;
    let mut completed = 0u64;
    let mut early_break = false;
    for _ in 0..t {
        let i = picker.pick(rng);
        let Some(x) = handles[i].samples.get(cursors[i]) else {
            early_break = true;
            break;
        };
        cursors[i] += 1;
        debug_assert!((handles[i].membership)(x), "sample outside its set");
        if !handles[..i].iter().any(|h| (h.membership)(x)) {
            hits += 1;
        }
        completed += 1;
    }
    let estimate = S::scale(total, &[S::from_count(hits)], &[S::from_count(t)]);
    UnionOutcome {
        estimate,
        iterations: t,
        completed,
        hits,
        early_break,
    }
}

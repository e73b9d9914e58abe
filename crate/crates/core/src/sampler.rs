//! Almost-uniform sampling from `∪_{q ∈ P} L(q^ℓ)` by growing a suffix.
//!
//! At each level the sampler estimates, for every symbol `b`, the size of the
//! union of the slices of the `b`-predecessors of the current frontier, picks
//! `b` in proportion to those estimates and moves the frontier back one
//! level. The acceptance mass `φ` is divided by the probability of every
//! choice made, and at level 0 the word is returned with probability `φ`, so
//! each word comes out with probability exactly the initial `φ` whenever no
//! overflow (`φ > 1`) occurs.

use rand::Rng;
use thiserror::Error;

use crate::nfa::{Nfa, Symbol};
use crate::scalar::{Picker, Scalar, Weighted};
use crate::slices::SliceTable;
use crate::stateset::StateSet;
use crate::tables::{EstimateTable, Sample, SampleStore};
use crate::union::{app_union, IterationRule, SetHandle, UnionError, UnionParams};
use crate::word::Word;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("estimates or stores missing for level {0}")]
    MissingTables(usize),
    #[error("frontier is empty or holds an empty slice at level {0}")]
    BadFrontier(usize),
    #[error(transparent)]
    Union(#[from] UnionError),
}

/// Accuracy settings shared by all levels of one sampling call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    /// Per-level accuracy `β` of the union estimates.
    pub beta: f64,
    /// Confidence `η`; each union call runs at `η / 4n`.
    pub eta: f64,
    /// Length `n` of the outer run, used in `η / 4n`.
    pub n: usize,
    pub rule: IterationRule,
}

impl SamplerConfig {
    fn union_params(&self, level: usize) -> UnionParams {
        let eta_prime = self.eta / (4.0 * self.n.max(1) as f64);
        let beta_prime = (1.0 + self.beta).powi(level as i32 - 1) - 1.0;
        UnionParams::new(self.beta, eta_prime, beta_prime).with_rule(self.rule)
    }
}

/// Arguments of one call: remaining length, frontier, suffix, mass.
#[derive(Debug, Clone)]
pub struct SampleCall<S> {
    pub level: usize,
    pub frontier: StateSet,
    pub suffix: Word,
    pub phi: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failure {
    /// Every symbol estimate at some level was zero, so no symbol can be
    /// picked. Karp–Luby can return 0 for a nonempty union when the first set
    /// is never drawn, and a fallback draw can be 0.
    NoMass,
    /// `φ > 1` at level 0.
    Overflow,
    /// The final Bernoulli(`φ`) trial failed.
    Miss,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    pub result: Result<Word, Failure>,
    pub union_calls: u64,
    pub early_breaks: u64,
}

impl SampleOutcome {
    pub fn word(&self) -> Option<&Word> {
        self.result.as_ref().ok()
    }
}

/// Read-only state the sampler works against.
pub struct SamplerTables<'a, S> {
    pub nfa: &'a Nfa,
    pub slices: &'a SliceTable,
    pub estimates: &'a EstimateTable<S>,
    pub stores: &'a SampleStore,
}

impl<S> Clone for SamplerTables<'_, S> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<S> Copy for SamplerTables<'_, S> {}

/// Runs one sampling trial. `call.frontier` must be a nonempty set of states
/// whose slices at `call.level` are nonempty.
pub fn sample<S: Scalar, R: Rng + ?Sized>(
    tables: SamplerTables<'_, S>,
    call: SampleCall<S>,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<SampleOutcome, SampleError> {
    let SamplerTables {
        nfa,
        slices,
        estimates,
        stores,
    } = tables;
    let SampleCall {
        level,
        mut frontier,
        suffix,
        phi,
    } = call;
    if level > 0 && (estimates.levels() < level || stores.levels() < level) {
        return Err(SampleError::MissingTables(level - 1));
    }
    if level > slices.max_level()
        || frontier.is_empty()
        || frontier.iter().any(|q| !slices.is_nonempty(q, level))
    {
        return Err(SampleError::BadFrontier(level));
    }

    let mut chosen: Vec<Symbol> = Vec::with_capacity(level);
    // φ is divided by pr_b = sz_b / Σ sz at every level
    let mut totals = Vec::with_capacity(level);
    let mut picked = Vec::with_capacity(level);
    let mut union_calls = 0;
    let mut early_breaks = 0;
    for l in (1..=level).rev() {
        let params = config.union_params(l);
        let mut frontiers = Vec::with_capacity(nfa.sigma());
        let mut sizes = Vec::with_capacity(nfa.sigma());
        for b in nfa.symbols() {
            let mut pb = nfa.step_back(&frontier, b);
            pb.intersect_with(slices.level(l - 1));
            let size = if pb.is_empty() {
                S::zero()
            } else {
                let handles: Vec<_> = pb
                    .iter()
                    .map(|p| {
                        SetHandle::new(
                            move |s: &Sample| s.reaches(p),
                            stores.get(p, l - 1),
                            estimates.get(p, l - 1).clone(),
                        )
                    })
                    .collect();
                let out = app_union(&params, &handles, rng)?;
                union_calls += 1;
                early_breaks += u64::from(out.early_break);
                out.estimate
            };
            frontiers.push(pb);
            sizes.push(size);
        }
        let Some(Weighted { picker, total, .. }) = S::weighted(&sizes) else {
            return Ok(SampleOutcome {
                result: Err(Failure::NoMass),
                union_calls,
                early_breaks,
            });
        };
        let b = picker.pick(rng);
        totals.push(total);
        picked.push(std::mem::replace(&mut sizes[b], S::zero()));
        frontier = std::mem::take(&mut frontiers[b]);
        chosen.push(b as Symbol);
    }

    let phi = S::scale(phi, &totals, &picked);
    let result = if phi > S::one() {
        Err(Failure::Overflow)
    } else if S::bernoulli(&phi, rng) {
        chosen.reverse();
        chosen.extend_from_slice(suffix.symbols());
        Ok(Word::new(chosen))
    } else {
        Err(Failure::Miss)
    };
    Ok(SampleOutcome {
        result,
        union_calls,
        early_breaks,
    })
}

//! Level-by-level estimation of `|L(A_n)|`.
//!
//! For every level `ℓ = 0..=n` and every state `q` with a nonempty slice the
//! run computes an estimate `N(q^ℓ)` from union estimates over the
//! `b`-predecessors at level `ℓ-1`, then fills a store `S(q^ℓ)` of exactly
//! `ns` words by repeated calls to the sampler, padding any shortfall with the
//! least word of the slice.
//!
//! Each slice draws from its own random stream derived from the master seed
//! and `(q, ℓ)`, and levels are strict barriers, so results do not depend on
//! the number of worker threads.

use std::f64::consts::E;
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::nfa::{Nfa, StateId};
use crate::params::{FprasParams, ParamsError};
use crate::sampler::{
    sample, Failure, SampleCall, SampleError, SampleOutcome, SamplerConfig, SamplerTables,
};
use crate::scalar::{uniform_up_to, Scalar};
use crate::slices::{smallest_word, SliceTable};
use crate::stateset::StateSet;
use crate::tables::{EstimateTable, Sample, SampleStore};
use crate::union::{app_union, SetHandle, UnionError};
use crate::word::Word;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FprasError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Union(#[from] UnionError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(
        "projected work {projected:.3e} exceeds the limit {limit:.3e}; use a practical schedule"
    )]
    WorkBudget { projected: f64, limit: f64 },
    #[error("automaton has {actual} states but the parameters were derived for {expected}")]
    StateMismatch { expected: usize, actual: usize },
    #[error("the language has no words of length {0}")]
    EmptyLanguage(usize),
    #[error("no accepted sample after {0} sampler calls")]
    Stalled(u64),
}

/// Random streams: one per slice, plus two reserved ones.
pub(crate) fn slice_rng(seed: u64, q: StateId, level: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((level as u64) << 32) | q as u64);
    rng
}

const FINAL_UNION_STREAM: u64 = u64::MAX;
const SAMPLING_STREAM: u64 = u64::MAX - 1;

fn reserved_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `2 / (3e)`, the acceptance scale of the sampler.
pub fn gamma_scale<S: Scalar>() -> S {
    S::from_real(2.0 / (3.0 * E))
}

/// Run options that do not affect the result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Refuse to start when [`FprasParams::projected_work`] exceeds this.
    pub work_limit: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            work_limit: Some(1e11),
        }
    }
}

/// Counters collected while building the tables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    pub fallback_events: u64,
    pub pad_total: u64,
    pub early_breaks: u64,
    pub union_calls: u64,
    pub sampler_calls: u64,
    pub sampler_accepted: u64,
    pub overflow_failures: u64,
    pub miss_failures: u64,
    pub no_mass_failures: u64,
    /// Nonempty slices whose estimate came out as zero.
    pub zero_estimate_slices: u64,
}

impl Diagnostics {
    fn absorb(&mut self, other: &Diagnostics) {
        self.fallback_events += other.fallback_events;
        self.pad_total += other.pad_total;
        self.early_breaks += other.early_breaks;
        self.union_calls += other.union_calls;
        self.sampler_calls += other.sampler_calls;
        self.sampler_accepted += other.sampler_accepted;
        self.overflow_failures += other.overflow_failures;
        self.miss_failures += other.miss_failures;
        self.no_mass_failures += other.no_mass_failures;
        self.zero_estimate_slices += other.zero_estimate_slices;
    }

    fn record(&mut self, out: &SampleOutcome) {
        self.sampler_calls += 1;
        self.union_calls += out.union_calls;
        self.early_breaks += out.early_breaks;
        match out.result {
            Ok(_) => self.sampler_accepted += 1,
            Err(Failure::Overflow) => self.overflow_failures += 1,
            Err(Failure::Miss) => self.miss_failures += 1,
            Err(Failure::NoMass) => self.no_mass_failures += 1,
        }
    }
}

/// Estimates and stores for levels `0..=n`.
#[derive(Debug, Clone)]
pub struct Tables<S> {
    pub params: FprasParams,
    pub slices: SliceTable,
    pub estimates: EstimateTable<S>,
    pub stores: SampleStore,
    pub diagnostics: Diagnostics,
}

impl<S: Scalar> Tables<S> {
    pub fn sampler_view<'a>(&'a self, nfa: &'a Nfa) -> SamplerTables<'a, S> {
        SamplerTables {
            nfa,
            slices: &self.slices,
            estimates: &self.estimates,
            stores: &self.stores,
        }
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        sampler_config(&self.params)
    }
}

fn sampler_config(params: &FprasParams) -> SamplerConfig {
    SamplerConfig {
        beta: params.beta,
        eta: params.sampler_eta(),
        n: params.n,
        rule: params.sampler_rule(),
    }
}

struct SliceResult<S> {
    estimate: S,
    store: Vec<Sample>,
    pads: usize,
    diagnostics: Diagnostics,
}

/// Fills `N(q^ℓ)` and `S(q^ℓ)` for one nonempty slice at `level ≥ 1`.
fn fill_slice<S: Scalar>(
    nfa: &Nfa,
    params: &FprasParams,
    partial: SamplerTables<'_, S>,
    q: StateId,
    level: usize,
    seed: u64,
) -> Result<SliceResult<S>, FprasError> {
    let mut rng = slice_rng(seed, q, level);
    let mut diag = Diagnostics::default();
    let prev = partial.slices.level(level - 1);

    let union_params = params.estimate_union(level);
    let mut estimate = S::zero();
    for b in nfa.symbols() {
        let handles: Vec<_> = nfa
            .predecessors(q, b)
            .iter()
            .copied()
            .filter(|&p| prev.contains(p))
            .map(|p| {
                SetHandle::new(
                    move |s: &Sample| s.reaches(p),
                    partial.stores.get(p, level - 1),
                    partial.estimates.get(p, level - 1).clone(),
                )
            })
            .collect();
        if handles.is_empty() {
            continue;
        }
        let out = app_union(&union_params, &handles, &mut rng)?;
        diag.union_calls += 1;
        diag.early_breaks += u64::from(out.early_break);
        estimate = estimate + out.estimate;
    }

    if params.fallback {
        // keep the sum with probability 1 − η/2^n
        let two_n = BigUint::one() << params.n;
        let miss = S::from_real(params.eta) / S::from_biguint(&two_n);
        if !S::bernoulli(&(S::one() - miss), &mut rng) {
            let bound = BigUint::one() << level;
            estimate = S::from_biguint(&uniform_up_to(&bound, &mut rng));
            diag.fallback_events += 1;
        }
    }

    let ns = params.ns as usize;
    let mut store = Vec::with_capacity(ns);
    if estimate > S::zero() {
        let phi0 = gamma_scale::<S>() / estimate.clone();
        let config = sampler_config(params);
        for _ in 0..params.xns {
            if store.len() >= ns {
                break;
            }
            let call = SampleCall {
                level,
                frontier: StateSet::singleton(nfa.num_states(), q),
                suffix: Word::empty(),
                phi: phi0.clone(),
            };
            let out = sample(partial, call, &config, &mut rng)?;
            diag.record(&out);
            if let Ok(w) = out.result {
                store.push(Sample::new(nfa, w));
            }
        }
    } else {
        diag.zero_estimate_slices += 1;
    }
    let pads = ns - store.len();
    if pads > 0 {
        let witness = smallest_word(nfa, q, level).expect("slice is nonempty");
        let filler = Sample::new(nfa, witness);
        store.resize(ns, filler);
    }
    diag.pad_total += pads as u64;
    Ok(SliceResult {
        estimate,
        store,
        pads,
        diagnostics: diag,
    })
}

/// Builds `N(q^ℓ)` and `S(q^ℓ)` for all levels `0..=n`.
pub fn build_tables<S: Scalar>(
    nfa: &Nfa,
    params: &FprasParams,
    seed: u64,
    options: &RunOptions,
) -> Result<Tables<S>, FprasError> {
    if nfa.num_states() != params.m {
        return Err(FprasError::StateMismatch {
            expected: params.m,
            actual: nfa.num_states(),
        });
    }
    if let Some(limit) = options.work_limit {
        let projected = params.projected_work(nfa.sigma());
        if projected > limit {
            return Err(FprasError::WorkBudget { projected, limit });
        }
    }
    let n = params.n;
    let m = nfa.num_states();
    let ns = params.ns as usize;
    let slices = SliceTable::new(nfa, n);
    let mut estimates = EstimateTable::new();
    let mut stores = SampleStore::new();
    let mut diagnostics = Diagnostics::default();

    // level 0: N = 1 and S = ns copies of λ for the initial state
    let mut row = vec![S::zero(); m];
    let mut level_stores = vec![Vec::new(); m];
    let mut pads = vec![0; m];
    let init = nfa.initial() as usize;
    row[init] = S::one();
    level_stores[init] = vec![Sample::new(nfa, Word::empty()); ns];
    pads[init] = ns - 1;
    diagnostics.pad_total += (ns - 1) as u64;
    estimates.push_level(row);
    stores.push_level(level_stores, pads);

    for level in 1..=n {
        let partial = SamplerTables {
            nfa,
            slices: &slices,
            estimates: &estimates,
            stores: &stores,
        };
        let states: Vec<StateId> = slices.level(level).iter().collect();
        let results: Vec<(StateId, SliceResult<S>)> = states
            .par_iter()
            .map(|&q| fill_slice(nfa, params, partial, q, level, seed).map(|r| (q, r)))
            .collect::<Result<_, _>>()?;
        let mut row = vec![S::zero(); m];
        let mut level_stores = vec![Vec::new(); m];
        let mut pads = vec![0; m];
        for (q, r) in results {
            diagnostics.absorb(&r.diagnostics);
            row[q as usize] = r.estimate;
            level_stores[q as usize] = r.store;
            pads[q as usize] = r.pads;
        }
        estimates.push_level(row);
        stores.push_level(level_stores, pads);
    }
    Ok(Tables {
        params: *params,
        slices,
        estimates,
        stores,
        diagnostics,
    })
}

/// States of `F` with a nonempty slice at level `n`.
fn live_finals(nfa: &Nfa, slices: &SliceTable, n: usize) -> Vec<StateId> {
    nfa.accepting()
        .iter()
        .copied()
        .filter(|&f| slices.is_nonempty(f, n))
        .collect()
}

/// Outcome of a counting run.
#[derive(Debug, Clone)]
pub struct FprasResult<S> {
    pub estimate: S,
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    /// Parameters of the table-building run, absent when no run was needed.
    pub params: Option<FprasParams>,
    pub diagnostics: Diagnostics,
    pub wall_ms: u64,
    pub tables: Option<Tables<S>>,
}

/// JSON rendering of an [`FprasResult`].
#[derive(Debug, Clone, Serialize)]
pub struct FprasReport {
    pub format: u32,
    pub version: &'static str,
    pub estimate_num: String,
    pub estimate_den: String,
    pub estimate_f64: f64,
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub schedule: &'static str,
    pub ns: Option<u64>,
    pub xns: Option<u64>,
    pub fallback: Option<bool>,
    pub fallback_events: u64,
    pub pad_total: u64,
    pub early_breaks: u64,
    pub wall_ms: u64,
}

/// Exact rational value of a scalar.
pub fn to_exact<S: Scalar>(x: &S) -> BigRational {
    let any: &dyn std::any::Any = x;
    match any.downcast_ref::<BigRational>() {
        Some(r) => r.clone(),
        None => BigRational::from_float(x.to_real()).unwrap_or_else(BigRational::zero),
    }
}

impl<S: Scalar> FprasResult<S> {
    pub fn report(&self) -> FprasReport {
        let exact = to_exact(&self.estimate);
        FprasReport {
            format: FORMAT_VERSION,
            version: env!("CARGO_PKG_VERSION"),
            estimate_num: exact.numer().to_string(),
            estimate_den: exact.denom().to_string(),
            estimate_f64: self.estimate.to_real(),
            n: self.n,
            m: self.m,
            epsilon: self.epsilon,
            delta: self.delta,
            seed: self.seed,
            schedule: self.params.map(|p| p.schedule.name()).unwrap_or("none"),
            ns: self.params.map(|p| p.ns),
            xns: self.params.map(|p| p.xns),
            fallback: self.params.map(|p| p.fallback),
            fallback_events: self.diagnostics.fallback_events,
            pad_total: self.diagnostics.pad_total,
            early_breaks: self.diagnostics.early_breaks,
            wall_ms: self.wall_ms,
        }
    }
}

/// How to derive parameters for a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// `None` selects the theoretical schedule; `Some` with `None` inside the
    /// default practical sizes.
    pub practical: Option<Option<crate::params::PracticalSchedule>>,
    pub fallback: bool,
    pub keep_tables: bool,
    pub options: RunOptions,
}

impl CountConfig {
    pub fn practical(epsilon: f64, delta: f64) -> Self {
        Self {
            epsilon,
            delta,
            practical: Some(None),
            fallback: true,
            keep_tables: false,
            options: RunOptions::default(),
        }
    }

    pub fn theoretical(epsilon: f64, delta: f64) -> Self {
        Self {
            practical: None,
            ..Self::practical(epsilon, delta)
        }
    }

    pub fn params(
        &self,
        m: usize,
        n: usize,
        epsilon: f64,
        delta: f64,
    ) -> Result<FprasParams, FprasError> {
        let params = match self.practical {
            None => FprasParams::derive(m, n, epsilon, delta)?,
            Some(p) => FprasParams::with_schedule(
                m,
                n,
                epsilon,
                delta,
                Some(p.unwrap_or_else(|| crate::params::PracticalSchedule::for_run(n, epsilon))),
            )?,
        };
        Ok(params.with_fallback(self.fallback))
    }
}

struct Prepared<S> {
    tables: Tables<S>,
    finals: Vec<StateId>,
    estimate: S,
    diagnostics: Diagnostics,
}

// Builds tables and combines the final slices. With several live final
// states the tables are built at ε/2 and δ/2 and the slices are merged by one
// more union estimate at ε/4 and δ/4.
fn prepare<S: Scalar>(
    nfa: &Nfa,
    n: usize,
    config: &CountConfig,
    seed: u64,
) -> Result<Option<Prepared<S>>, FprasError> {
    if !(config.epsilon > 0.0 && config.epsilon < 1.0) {
        return Err(ParamsError::Epsilon(config.epsilon).into());
    }
    if !(config.delta > 0.0 && config.delta < 1.0) {
        return Err(ParamsError::Delta(config.delta).into());
    }
    let slices = SliceTable::new(nfa, n);
    if n == 0 || !slices.language_nonempty(nfa) {
        return Ok(None);
    }
    let finals = live_finals(nfa, &slices, n);
    let m = nfa.num_states();
    if finals.len() == 1 {
        let params = config.params(m, n, config.epsilon, config.delta)?;
        let tables = build_tables::<S>(nfa, &params, seed, &config.options)?;
        let estimate = tables.estimates.get(finals[0], n).clone();
        let diagnostics = tables.diagnostics.clone();
        return Ok(Some(Prepared {
            tables,
            finals,
            estimate,
            diagnostics,
        }));
    }
    let params = config.params(m, n, config.epsilon / 2.0, config.delta / 2.0)?;
    let tables = build_tables::<S>(nfa, &params, seed, &config.options)?;
    let union_params = crate::union::UnionParams::new(
        config.epsilon / 4.0,
        config.delta / 4.0,
        (1.0 + params.beta).powi(n as i32) - 1.0,
    )
    .with_rule(params.estimate_rule());
    let handles: Vec<_> = finals
        .iter()
        .map(|&f| {
            SetHandle::new(
                move |s: &Sample| s.reaches(f),
                tables.stores.get(f, n),
                tables.estimates.get(f, n).clone(),
            )
        })
        .collect();
    let mut rng = reserved_rng(seed, FINAL_UNION_STREAM);
    let out = app_union(&union_params, &handles, &mut rng)?;
    let mut diagnostics = tables.diagnostics.clone();
    diagnostics.union_calls += 1;
    diagnostics.early_breaks += u64::from(out.early_break);
    Ok(Some(Prepared {
        tables,
        finals,
        estimate: out.estimate,
        diagnostics,
    }))
}

/// Estimates `|L(A_n)|`.
pub fn count<S: Scalar>(
    nfa: &Nfa,
    n: usize,
    config: &CountConfig,
    seed: u64,
) -> Result<FprasResult<S>, FprasError> {
    let start = Instant::now();
    let prepared = prepare::<S>(nfa, n, config, seed)?;
    let (estimate, params, diagnostics, tables) = match prepared {
        // n = 0 or empty language: exact answer, no randomness
        None => {
            let exact = if SliceTable::new(nfa, n).language_nonempty(nfa) {
                S::one()
            } else {
                S::zero()
            };
            (exact, None, Diagnostics::default(), None)
        }
        Some(p) => {
            let params = p.tables.params;
            (
                p.estimate,
                Some(params),
                p.diagnostics,
                config.keep_tables.then_some(p.tables),
            )
        }
    };
    Ok(FprasResult {
        estimate,
        n,
        m: nfa.num_states(),
        epsilon: config.epsilon,
        delta: config.delta,
        seed,
        params,
        diagnostics,
        wall_ms: start.elapsed().as_millis() as u64,
        tables,
    })
}

/// Words of `L(A_n)` sampled almost uniformly.
#[derive(Debug, Clone)]
pub struct SampledWords<S> {
    pub words: Vec<Word>,
    pub estimate: S,
    pub sampler_calls: u64,
    pub diagnostics: Diagnostics,
}

/// Draws `count` words of `L(A_n)`: builds the tables, then repeats the
/// sampler on the set of live final states at level `n` until enough
/// words are accepted.
pub fn sample_accepted<S: Scalar>(
    nfa: &Nfa,
    n: usize,
    count: usize,
    config: &CountConfig,
    seed: u64,
) -> Result<SampledWords<S>, FprasError> {
    let slices = SliceTable::new(nfa, n);
    if !slices.language_nonempty(nfa) {
        return Err(FprasError::EmptyLanguage(n));
    }
    let Some(prepared) = prepare::<S>(nfa, n, config, seed)? else {
        // n = 0 and the empty word is accepted
        return Ok(SampledWords {
            words: vec![Word::empty(); count],
            estimate: S::one(),
            sampler_calls: 0,
            diagnostics: Diagnostics::default(),
        });
    };
    let Prepared {
        tables,
        finals,
        estimate,
        mut diagnostics,
    } = prepared;
    let mut rng = reserved_rng(seed, SAMPLING_STREAM);
    let frontier = StateSet::from_states(nfa.num_states(), finals.iter().copied());
    // a zero estimate still lets the sampler run with unit mass
    let phi0 = if estimate > S::zero() {
        gamma_scale::<S>() / estimate.clone()
    } else {
        S::one()
    };
    let config_s = tables.sampler_config();
    let view = tables.sampler_view(nfa);
    let max_calls = (count as u64 + 1).saturating_mul(tables.params.xns.max(1000));
    let mut words = Vec::with_capacity(count);
    let mut calls = 0u64;
    while words.len() < count {
        if calls >= max_calls {
            return Err(FprasError::Stalled(calls));
        }
        let call = SampleCall {
            level: n,
            frontier: frontier.clone(),
            suffix: Word::empty(),
            phi: phi0.clone(),
        };
        let out = sample(view, call, &config_s, &mut rng)?;
        calls += 1;
        diagnostics.record(&out);
        if let Ok(w) = out.result {
            words.push(w);
        }
    }
    Ok(SampledWords {
        words,
        estimate,
        sampler_calls: calls,
        diagnostics,
    })
}

//! Random automata and the accuracy harness.
//!
//! [`run_suite`] runs the counting algorithm over a grid of cells, compares
//! every estimate with the determinized oracle and reports per-cell failure
//! rates of the `(1 ± ε)` sandwich.

use std::io::Write;
use std::time::Instant;

use num_bigint::BigUint;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sharpnfa::fpras::to_exact;
use sharpnfa::params::theoretical_ns;
use sharpnfa::{count, determinized_count, Budget, CountConfig, Nfa, Rational, Scalar, SliceTable};

/// Parameters of a random automaton.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NfaGenSpec {
    pub m: usize,
    pub sigma: usize,
    /// Probability of each transition `(p, b, q)`.
    pub density: f64,
    pub accepting: usize,
    pub seed: u64,
}

/// Includes every `(p, b, q)` independently with probability `density`.
/// State 0 is initial; `accepting` distinct states are drawn uniformly.
pub fn gen_random_nfa(spec: &NfaGenSpec) -> Nfa {
    assert!(
        (0.0..=1.0).contains(&spec.density),
        "density must lie in [0, 1]"
    );
    assert!(
        (1..=spec.m).contains(&spec.accepting),
        "need 1..=m accepting states"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut transitions = Vec::new();
    for p in 0..spec.m {
        for b in 0..spec.sigma {
            for q in 0..spec.m {
                if rng.gen_bool(spec.density) {
                    transitions.push((p, b, q));
                }
            }
        }
    }
    let accepting = sample(&mut rng, spec.m, spec.accepting).into_vec();
    Nfa::new(spec.m, spec.sigma, 0, accepting, transitions).expect("generated automaton is valid")
}

/// First automaton in the seed sequence of `spec` whose length-`n` language
/// is nonempty, with the seed that produced it.
pub fn gen_nonempty_nfa(spec: &NfaGenSpec, n: usize, tries: usize) -> Option<(Nfa, u64)> {
    (0..tries as u64).find_map(|k| {
        let seed = spec
            .seed
            .wrapping_add(k.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let a = gen_random_nfa(&NfaGenSpec { seed, ..*spec });
        SliceTable::new(&a, n)
            .language_nonempty(&a)
            .then_some((a, seed))
    })
}

/// One grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub m: usize,
    pub n: usize,
    pub sigma: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub density: f64,
    pub accepting: usize,
    pub trials: usize,
}

impl Cell {
    pub fn new(m: usize, n: usize, trials: usize) -> Self {
        Self {
            m,
            n,
            sigma: 2,
            epsilon: 0.5,
            delta: 0.2,
            density: 0.3,
            accepting: 1,
            trials,
        }
    }
}

/// Default grid: every cell at `ε = 0.5`, `δ = 0.2`, 40 trials. Sized to
/// finish within a few minutes on one core.
pub fn default_grid() -> Vec<Cell> {
    [(2, 4), (3, 6), (4, 6), (4, 8), (5, 8), (6, 10)]
        .into_iter()
        .map(|(m, n)| Cell::new(m, n, 40))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub cells: Vec<Cell>,
    pub seed: u64,
    pub fallback: bool,
    /// Report `wall_ms = 0` so output is byte-reproducible.
    pub omit_timing: bool,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub m: usize,
    pub n: usize,
    pub sigma: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub estimate_num: String,
    pub estimate_den: String,
    pub oracle: String,
    pub ok: bool,
    pub ns: u64,
    pub xns: u64,
    pub pads: u64,
    pub fallbacks: u64,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub cell: Cell,
    pub runs: usize,
    pub failures: usize,
    pub failure_rate: f64,
    pub mean_relative_error: f64,
    /// Accepted sampler calls over all sampler calls.
    pub sampler_acceptance: f64,
    /// Padded entries over all store entries of nonempty slices.
    pub pad_frequency: f64,
    pub wall_ms: u64,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub rows: Vec<Row>,
    pub summaries: Vec<CellSummary>,
}

struct Trial {
    row: Row,
    rel_error: f64,
    sampler_calls: u64,
    sampler_accepted: u64,
    store_entries: u64,
}

/// Whether `est` lies in `[c/(1+ε), (1+ε)c]`, decided exactly.
pub fn sandwiched(est: &Rational, c: &BigUint, epsilon: f64) -> bool {
    let one_eps = Rational::from_real(1.0 + epsilon);
    let c = Rational::from_biguint(c);
    est.clone() * one_eps.clone() >= c && *est <= c * one_eps
}

fn run_trial<S: Scalar>(cell: &Cell, seed: u64, config: &SuiteConfig) -> Result<Trial, String> {
    let spec = NfaGenSpec {
        m: cell.m,
        sigma: cell.sigma,
        density: cell.density,
        accepting: cell.accepting,
        seed,
    };
    let (a, _) = gen_nonempty_nfa(&spec, cell.n, 256)
        .ok_or_else(|| format!("no nonempty instance for seed {seed}"))?;
    let oracle = determinized_count(&a, cell.n, &Budget::default())
        .map_err(|e| e.to_string())?
        .total;
    let mut cfg = CountConfig::practical(cell.epsilon, cell.delta);
    cfg.fallback = config.fallback;
    let start = Instant::now();
    let r = count::<S>(&a, cell.n, &cfg, seed).map_err(|e| e.to_string())?;
    let wall_ms = if config.omit_timing {
        0
    } else {
        start.elapsed().as_millis() as u64
    };
    let est = to_exact(&r.estimate);
    let truth: f64 = oracle.to_string().parse().unwrap_or(f64::INFINITY);
    let rel_error = (r.estimate.to_real() - truth).abs() / truth.max(1.0);
    let params = r.params;
    let slices = SliceTable::new(&a, cell.n);
    let nonempty = (0..=cell.n)
        .map(|l| slices.level(l).len() as u64)
        .sum::<u64>();
    Ok(Trial {
        row: Row {
            m: cell.m,
            n: cell.n,
            sigma: cell.sigma,
            epsilon: cell.epsilon,
            delta: cell.delta,
            seed,
            estimate_num: est.numer().to_string(),
            estimate_den: est.denom().to_string(),
            oracle: oracle.to_string(),
            ok: sandwiched(&est, &oracle, cell.epsilon),
            ns: params.map_or(0, |p| p.ns),
            xns: params.map_or(0, |p| p.xns),
            pads: r.diagnostics.pad_total,
            fallbacks: r.diagnostics.fallback_events,
            wall_ms,
        },
        rel_error,
        sampler_calls: r.diagnostics.sampler_calls,
        sampler_accepted: r.diagnostics.sampler_accepted,
        store_entries: nonempty * params.map_or(0, |p| p.ns),
    })
}

fn trial_seeds(base: u64, cell_index: usize, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(cell_index as u64);
    (0..trials).map(|_| rng.gen()).collect()
}

/// Runs every cell; trials run in parallel and rows come out in grid order.
pub fn run_suite<S: Scalar>(config: &SuiteConfig) -> SuiteReport {
    let jobs: Vec<(usize, u64)> = config
        .cells
        .iter()
        .enumerate()
        .flat_map(|(i, c)| {
            trial_seeds(config.seed, i, c.trials)
                .into_iter()
                .map(move |s| (i, s))
        })
        .collect();
    let results: Vec<(usize, Result<Trial, String>)> = jobs
        .par_iter()
        .map(|&(i, seed)| (i, run_trial::<S>(&config.cells[i], seed, config)))
        .collect();
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (i, cell) in config.cells.iter().enumerate() {
        let mine: Vec<&Result<Trial, String>> = results
            .iter()
            .filter(|(j, _)| *j == i)
            .map(|(_, r)| r)
            .collect();
        let ok: Vec<&Trial> = mine.iter().filter_map(|r| r.as_ref().ok()).collect();
        let errors: Vec<String> = mine
            .iter()
            .filter_map(|r| r.as_ref().err().cloned())
            .collect();
        let runs = ok.len();
        let failures = ok.iter().filter(|t| !t.row.ok).count();
        let calls: u64 = ok.iter().map(|t| t.sampler_calls).sum();
        let accepted: u64 = ok.iter().map(|t| t.sampler_accepted).sum();
        let pads: u64 = ok.iter().map(|t| t.row.pads).sum();
        let entries: u64 = ok.iter().map(|t| t.store_entries).sum();
        summaries.push(CellSummary {
            cell: *cell,
            runs,
            failures,
            failure_rate: failures as f64 / runs.max(1) as f64,
            mean_relative_error: ok.iter().map(|t| t.rel_error).sum::<f64>() / runs.max(1) as f64,
            sampler_acceptance: accepted as f64 / calls.max(1) as f64,
            pad_frequency: pads as f64 / entries.max(1) as f64,
            wall_ms: ok.iter().map(|t| t.row.wall_ms).sum(),
            errors,
        });
        rows.extend(ok.into_iter().map(|t| t.row.clone()));
    }
    SuiteReport { rows, summaries }
}

/// Writes `# format=1 seed=<seed>` followed by a CSV header and one line per
/// row.
pub fn write_csv<W: Write>(rows: &[Row], seed: u64, out: W) -> csv::Result<()> {
    let mut out = out;
    writeln!(out, "# format=1 seed={seed}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `ns(m = big) / ns(m = small)` under the theoretical schedule.
pub fn store_size_ratio(small: usize, big: usize, n: usize, epsilon: f64, delta: f64) -> f64 {
    theoretical_ns(big, n, epsilon, delta) as f64 / theoretical_ns(small, n, epsilon, delta) as f64
}

//! Parameter schedules for the counting run.
//!
//! The [`Schedule::Theoretical`] schedule evaluates the constants of the analysis
//! verbatim:
//!
//! - `β = ε / 4n²`, `η = δ / (2nm)`
//! - `ns = ⌈4096·e·n⁴/ε² · ln(4096·m²·n²·ln(ε⁻²)/δ)⌉`
//! - `xns = ⌈ns · 12 · (1 − 2/(3e²))⁻¹ · ln(8/η)⌉`
//!
//! with every union estimate running its full iteration count. Already at
//! `n = 2` this asks for millions of stored samples per slice, so runs at
//! desk scale use [`Schedule::Practical`], which keeps `β` and `η` but fixes
//! the store size, the sampler-call cap and per-set iteration caps for the
//! union estimates.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::union::{ceil_count, IterationRule, UnionParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("epsilon must lie in (0, 1), got {0}")]
    Epsilon(f64),
    #[error("delta must lie in (0, 1), got {0}")]
    Delta(f64),
    #[error("length n must be at least 1")]
    Length,
    #[error("automaton must have at least one state")]
    States,
    #[error("store size {ns} is below the largest union threshold {thresh}")]
    StoreTooSmall { ns: u64, thresh: u64 },
    #[error("invalid practical schedule: {0}")]
    Practical(String),
}

/// Sizes for desk-scale runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PracticalSchedule {
    /// Store size per nonempty slice.
    pub ns: u64,
    /// Maximum sampler calls per slice.
    pub xns: u64,
    /// Per-set iteration cap for the union estimates that produce `N(q^ℓ)`.
    pub estimate_iterations: u64,
    /// Per-set iteration cap for the union estimates inside the sampler.
    pub sampler_iterations: u64,
}

impl PracticalSchedule {
    /// Defaults for a run of length `n` at accuracy `epsilon`.
    ///
    /// The union estimates behind `N(q^ℓ)` get `⌈n/ε²⌉` iterations per set
    /// (at least 16). The sampler's estimates only steer the symbol choice,
    /// since `φ` is divided by the probability actually used, and get a
    /// quarter of that (at least 8). Stores hold three times the estimate
    /// cap, which covers the capped threshold of every union call.
    pub fn for_run(n: usize, epsilon: f64) -> Self {
        let estimate_iterations = ceil_count(n.max(1) as f64 / (epsilon * epsilon)).max(16);
        let sampler_iterations = (estimate_iterations / 4).max(8);
        let ns = 3 * estimate_iterations;
        Self {
            ns,
            xns: 8 * ns,
            estimate_iterations,
            sampler_iterations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Schedule {
    Theoretical,
    Practical(PracticalSchedule),
}

impl Schedule {
    pub fn name(&self) -> &'static str {
        match self {
            Schedule::Theoretical => "theoretical",
            Schedule::Practical(_) => "practical",
        }
    }
}

/// Derived parameters of one counting run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FprasParams {
    pub epsilon: f64,
    pub delta: f64,
    pub n: usize,
    pub m: usize,
    pub beta: f64,
    pub eta: f64,
    pub ns: u64,
    pub xns: u64,
    pub fallback: bool,
    pub schedule: Schedule,
}

/// `⌈4096·e·n⁴/ε² · ln(4096·m²·n²·ln(ε⁻²)/δ)⌉`.
pub fn theoretical_ns(m: usize, n: usize, epsilon: f64, delta: f64) -> u64 {
    let (m, n) = (m as f64, n as f64);
    let inner = 4096.0 * m * m * n * n * (epsilon.powi(-2)).ln() / delta;
    ceil_count(4096.0 * E * n.powi(4) / (epsilon * epsilon) * inner.ln())
}

/// `⌈ns · 12 · (1 − 2/(3e²))⁻¹ · ln(8/η)⌉`.
pub fn theoretical_xns(ns: u64, eta: f64) -> u64 {
    ceil_count(ns as f64 * 12.0 / (1.0 - 2.0 / (3.0 * E * E)) * (8.0 / eta).ln())
}

impl FprasParams {
    /// Theoretical schedule.
    pub fn derive(m: usize, n: usize, epsilon: f64, delta: f64) -> Result<Self, ParamsError> {
        Self::with_schedule(m, n, epsilon, delta, None)
    }

    /// Practical schedule with [`PracticalSchedule::for_run`] sizes.
    pub fn practical(m: usize, n: usize, epsilon: f64, delta: f64) -> Result<Self, ParamsError> {
        Self::with_schedule(
            m,
            n,
            epsilon,
            delta,
            Some(PracticalSchedule::for_run(n, epsilon)),
        )
    }

    /// `practical = None` selects the theoretical schedule.
    pub fn with_schedule(
        m: usize,
        n: usize,
        epsilon: f64,
        delta: f64,
        practical: Option<PracticalSchedule>,
    ) -> Result<Self, ParamsError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(ParamsError::Epsilon(epsilon));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(ParamsError::Delta(delta));
        }
        if n == 0 {
            return Err(ParamsError::Length);
        }
        if m == 0 {
            return Err(ParamsError::States);
        }
        let beta = epsilon / (4.0 * (n * n) as f64);
        let eta = delta / (2.0 * (n * m) as f64);
        let (ns, xns, schedule) = match practical {
            None => {
                let ns = theoretical_ns(m, n, epsilon, delta);
                (ns, theoretical_xns(ns, eta), Schedule::Theoretical)
            }
            Some(p) => {
                if p.ns == 0
                    || p.xns == 0
                    || p.estimate_iterations == 0
                    || p.sampler_iterations == 0
                {
                    return Err(ParamsError::Practical(format!("{p:?}")));
                }
                (p.ns, p.xns, Schedule::Practical(p))
            }
        };
        let params = Self {
            epsilon,
            delta,
            n,
            m,
            beta,
            eta,
            ns,
            xns,
            fallback: true,
            schedule,
        };
        let thresh = params.max_thresh();
        if ns < thresh {
            return Err(ParamsError::StoreTooSmall { ns, thresh });
        }
        Ok(params)
    }

    pub fn with_fallback(mut self, enabled: bool) -> Self {
        self.fallback = enabled;
        self
    }

    /// `(1+β)^{ℓ-1} − 1`, the slack of level-`ℓ-1` estimates.
    pub fn slack(&self, level: usize) -> f64 {
        (1.0 + self.beta).powi(level as i32 - 1) - 1.0
    }

    pub fn estimate_rule(&self) -> IterationRule {
        match self.schedule {
            Schedule::Theoretical => IterationRule::Formula,
            Schedule::Practical(p) => IterationRule::Capped {
                per_set: p.estimate_iterations,
            },
        }
    }

    pub fn sampler_rule(&self) -> IterationRule {
        match self.schedule {
            Schedule::Theoretical => IterationRule::Formula,
            Schedule::Practical(p) => IterationRule::Capped {
                per_set: p.sampler_iterations,
            },
        }
    }

    /// Confidence passed to the estimate-step union calls:
    /// `η/2 · (1 − 1/2^{n+1})`.
    pub fn estimate_confidence(&self) -> f64 {
        self.eta / 2.0 * (1.0 - 0.5f64.powi(self.n as i32 + 1))
    }

    /// Confidence handed to each sampler call: `η / (2·xns)`.
    pub fn sampler_eta(&self) -> f64 {
        self.eta / (2.0 * self.xns as f64)
    }

    pub fn estimate_union(&self, level: usize) -> UnionParams {
        UnionParams::new(self.beta, self.estimate_confidence(), self.slack(level))
            .with_rule(self.estimate_rule())
    }

    /// Union parameters the sampler uses at `level` (confidence `η'/4n`).
    pub fn sampler_union(&self, level: usize) -> UnionParams {
        UnionParams::new(
            self.beta,
            self.sampler_eta() / (4.0 * self.n as f64),
            self.slack(level),
        )
        .with_rule(self.sampler_rule())
    }

    /// Largest sample-length requirement of any union call of the run.
    pub fn max_thresh(&self) -> u64 {
        let k = self.m;
        self.estimate_union(self.n)
            .thresh(k)
            .max(self.sampler_union(self.n).thresh(k))
    }

    /// Rough count of union-estimator iterations for a full run, assuming
    /// every union has `m` sets of equal size.
    pub fn projected_work(&self, sigma: usize) -> f64 {
        let slices = (self.m * self.n) as f64;
        let m_hat = self.m as u64;
        let est = self.estimate_union(self.n).iterations(m_hat) as f64;
        let samp = self.sampler_union(self.n).iterations(m_hat) as f64;
        let avg_level = (self.n as f64 + 1.0) / 2.0;
        slices * sigma as f64 * (est + self.xns as f64 * avg_level * samp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_and_eta() {
        let p = FprasParams::derive(3, 2, 0.5, 0.1).unwrap();
        assert_eq!(p.beta, 1.0 / 32.0);
        let p = FprasParams::derive(3, 4, 0.5, 0.1).unwrap();
        assert!((p.eta - 1.0 / 240.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            FprasParams::derive(2, 2, 1.0, 0.1),
            Err(ParamsError::Epsilon(_))
        ));
        assert!(matches!(
            FprasParams::derive(2, 2, 0.5, 0.0),
            Err(ParamsError::Delta(_))
        ));
        assert!(matches!(
            FprasParams::derive(2, 0, 0.5, 0.1),
            Err(ParamsError::Length)
        ));
        assert!(matches!(
            FprasParams::derive(0, 2, 0.5, 0.1),
            Err(ParamsError::States)
        ));
    }

    #[test]
    fn theoretical_store_covers_every_threshold() {
        for (m, n) in [(1, 1), (4, 6), (20, 10)] {
            let p = FprasParams::derive(m, n, 0.5, 0.2).unwrap();
            assert!(p.ns >= p.max_thresh());
            assert!(p.xns > p.ns);
        }
    }

    #[test]
    fn practical_store_too_small_rejected() {
        let tiny = PracticalSchedule {
            ns: 10,
            xns: 100,
            estimate_iterations: 50,
            sampler_iterations: 16,
        };
        assert!(matches!(
            FprasParams::with_schedule(4, 6, 0.5, 0.2, Some(tiny)),
            Err(ParamsError::StoreTooSmall { .. })
        ));
        assert!(FprasParams::practical(4, 6, 0.5, 0.2).is_ok());
    }
}

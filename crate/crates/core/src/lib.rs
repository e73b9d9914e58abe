//! Approximate counting and almost-uniform sampling of the length-`n` words
//! accepted by an NFA, with exact oracles for checking.
//!
//! The estimation code is generic over a [`Scalar`]: exact rationals
//! ([`Rational`]) give bit-exact reproducible runs, `f64` gives fast ones.

pub mod exact;
pub mod fpras;
pub mod nfa;
pub mod params;
pub mod reach;
pub mod sampler;
pub mod scalar;
pub mod slices;
pub mod stateset;
pub mod tables;
pub mod union;
pub mod word;

pub use exact::{
    brute_force_count, determinized_count, enumerate_language, enumerate_slice, tv_distance,
    uniform_exact_sample, Budget, DeterminizedCounts, EmpiricalDist, OracleError, UniformSlice,
};
pub use fpras::{
    build_tables, count, sample_accepted, CountConfig, Diagnostics, FprasError, FprasReport,
    FprasResult, RunOptions, SampledWords, Tables,
};
pub use nfa::{all_strings, Nfa, NfaError, StateId, Symbol, MAX_ALPHABET};
pub use params::{FprasParams, ParamsError, PracticalSchedule, Schedule};
pub use reach::{member, reach_states, ReachCache};
pub use sampler::{sample, Failure, SampleCall, SampleError, SampleOutcome, SamplerConfig};
pub use scalar::Scalar;
pub use slices::{smallest_word, SliceTable};
pub use stateset::StateSet;
pub use tables::{EstimateTable, Sample, SampleStore};
pub use union::{app_union, IterationRule, SetHandle, UnionError, UnionOutcome, UnionParams};
pub use word::Word;

/// Exact nonnegative rationals, the reference scalar.
pub type Rational = num_rational::BigRational;
/// Arbitrary-precision count.
pub type BigCount = num_bigint::BigUint;

pub type ExactResult = FprasResult<Rational>;
pub type FloatResult = FprasResult<f64>;
pub type ExactTables = Tables<Rational>;

//! Scalar types for size estimates and probabilities.
//!
//! The counting and sampling routines are generic over [`Scalar`]. The exact
//! instantiation uses [`BigRational`], where every Bernoulli and categorical
//! draw is decided exactly against a uniform random real. The floating-point
//! instantiations (`f64`, `f32`) trade exactness for speed.

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use rand::Rng;

/// A prepared categorical distribution over `0..k`.
pub trait Picker: Send + Sync {
    /// Draws an index. Indices with zero weight are never returned.
    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> usize;
}

pub struct Weighted<S: Scalar> {
    pub picker: S::Picker,
    pub total: S,
    pub m_hat: u64,
}

/// Number type for estimates, masses and probabilities.
pub trait Scalar:
    Num + FromPrimitive + ToPrimitive + PartialOrd + Clone + Debug + Send + Sync + 'static
{
    type Picker: Picker;

    fn from_count(v: u64) -> Self;

    fn from_biguint(v: &BigUint) -> Self;

    /// Converts a real parameter. Exact for the rational instantiation.
    fn from_real(v: f64) -> Self;

    fn to_real(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Smallest integer not below `self`; `self` must be nonnegative.
    fn ceil_count(&self) -> u64;

    /// Builds a sampler drawing `i` with probability `w_i / Σ w`.
    ///
    /// Returns `None` when the weights do not sum to a positive value.
    /// Negative weights are treated as zero.
    fn picker(weights: &[Self]) -> Option<Self::Picker>;

    /// Picker together with `Σ w` and `⌈Σ w / max w⌉` over the positive
    /// weights.
    fn weighted(weights: &[Self]) -> Option<Weighted<Self>> {
        let picker = Self::picker(weights)?;
        let positive = || weights.iter().filter(|w| **w > Self::zero());
        let total = positive().fold(Self::zero(), |acc, w| acc + w.clone());
        let max = positive().fold(
            Self::zero(),
            |acc, w| if *w > acc { w.clone() } else { acc },
        );
        let m_hat = (total.clone() / max).ceil_count().max(1);
        Some(Weighted {
            picker,
            total,
            m_hat,
        })
    }

    /// Returns true with probability `p`, clamped to `[0, 1]`.
    fn bernoulli<R: Rng + ?Sized>(p: &Self, rng: &mut R) -> bool {
        if *p <= Self::zero() {
            return false;
        }
        if *p >= Self::one() {
            return true;
        }
        let q = Self::one() - p.clone();
        Self::picker(&[p.clone(), q])
            .map(|picker| picker.pick(rng) == 0)
            .unwrap_or(false)
    }

    /// `start · Π muls / Π divs`. Every divisor must be nonzero.
    fn scale(start: Self, muls: &[Self], divs: &[Self]) -> Self {
        let up = muls.iter().fold(start, |acc, x| acc * x.clone());
        divs.iter().fold(up, |acc, x| acc / x.clone())
    }

    fn powi(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc * self.clone();
        }
        acc
    }
}

/// Cumulative-weight picker for floating-point weights.
#[derive(Debug, Clone)]
pub struct FloatPicker {
    cumulative: Vec<f64>,
}

impl Picker for FloatPicker {
    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("nonempty picker");
        let u = rng.gen::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u);
        // float rounding can push u onto the last boundary
        let mut idx = idx.min(self.cumulative.len() - 1);
        while idx > 0 && self.cumulative[idx] == self.cumulative[idx - 1] {
            idx -= 1;
        }
        idx
    }
}

fn float_picker(weights: impl Iterator<Item = f64>) -> Option<FloatPicker> {
    let mut cumulative = Vec::new();
    let mut acc = 0.0;
    for w in weights {
        if w.is_finite() && w > 0.0 {
            acc += w;
        }
        cumulative.push(acc);
    }
    (acc > 0.0 && acc.is_finite()).then_some(FloatPicker { cumulative })
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            type Picker = FloatPicker;

            fn from_count(v: u64) -> Self {
                v as $t
            }

            fn from_biguint(v: &BigUint) -> Self {
                v.to_f64().unwrap_or(f64::INFINITY) as $t
            }

            fn from_real(v: f64) -> Self {
                v as $t
            }

            fn ceil_count(&self) -> u64 {
                self.ceil().max(0.0) as u64
            }

            fn picker(weights: &[Self]) -> Option<FloatPicker> {
                float_picker(weights.iter().map(|&w| w as f64))
            }

            fn bernoulli<R: Rng + ?Sized>(p: &Self, rng: &mut R) -> bool {
                (rng.gen::<f64>()) < (*p as f64)
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

/// Exact categorical sampler over integer weights.
///
/// A draw reads a uniform real `U` in `[0, 1)` 64 bits at a time. The first
/// word is compared against a float approximation of each cumulative
/// boundary `C_i / W`; only when it lands within `2^-40` of a boundary is the
/// exact 64-bit prefix computed, and only on a prefix tie is the remainder of
/// `U` resolved by an exact integer comparison. The result is distributed
/// exactly as the weights.
#[derive(Debug, Clone)]
pub struct ExactPicker {
    total: BigUint,
    cumulative: Vec<BigUint>,
    approx: Vec<f64>,
    weights_nonzero: Vec<bool>,
}

const NEAR: f64 = 1.0 / (1u64 << 40) as f64;

impl ExactPicker {
    pub fn from_integer_weights(weights: &[BigUint]) -> Option<Self> {
        let total: BigUint = weights.iter().sum();
        if total.is_zero() {
            return None;
        }
        // keep about 64 significant bits so the ratios stay in f64 range
        let shift = total.bits().saturating_sub(64);
        let scaled_total = (&total >> shift).to_f64().expect("finite");
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut approx = Vec::with_capacity(weights.len());
        let mut acc = BigUint::zero();
        for w in weights {
            acc += w;
            approx.push((&acc >> shift).to_f64().expect("finite") / scaled_total);
            cumulative.push(acc.clone());
        }
        Some(Self {
            total,
            cumulative,
            approx,
            weights_nonzero: weights.iter().map(|w| !w.is_zero()).collect(),
        })
    }
}

impl Picker for ExactPicker {
    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let head = rng.gen::<u64>();
        let x = head as f64 / 18446744073709551616.0;
        // tail of U, scaled by the total, drawn only on a prefix tie
        let mut tail: Option<BigUint> = None;
        for i in 0..self.cumulative.len() {
            if !self.weights_nonzero[i] {
                continue;
            }
            let a = self.approx[i];
            let below = if x < a - NEAR {
                true
            } else if x > a + NEAR {
                false
            } else {
                let (prefix, rem) = (&self.cumulative[i] << 64u32).div_rem(&self.total);
                let head = BigUint::from(head);
                match head.cmp(&prefix) {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Greater => false,
                    std::cmp::Ordering::Equal => {
                        let v = tail.get_or_insert_with(|| rng.gen_biguint_below(&self.total));
                        *v < rem
                    }
                }
            };
            if below {
                return i;
            }
        }
        // unreachable for a well-formed picker: the last boundary is 1 exactly
        self.weights_nonzero
            .iter()
            .rposition(|&nz| nz)
            .expect("picker has positive total")
    }
}

impl Scalar for BigRational {
    type Picker = ExactPicker;

    fn from_count(v: u64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_biguint(v: &BigUint) -> Self {
        BigRational::from_integer(BigInt::from(v.clone()))
    }

    fn from_real(v: f64) -> Self {
        BigRational::from_float(v).expect("finite real parameter")
    }

    fn ceil_count(&self) -> u64 {
        let c = self.ceil().to_integer();
        if c.is_negative() {
            0
        } else {
            c.to_u64().unwrap_or(u64::MAX)
        }
    }

    // one reduction at the end instead of one per factor
    fn scale(start: Self, muls: &[Self], divs: &[Self]) -> Self {
        let (mut num, mut den) = start.into();
        for x in muls {
            num *= x.numer();
            den *= x.denom();
        }
        for x in divs {
            num *= x.denom();
            den *= x.numer();
        }
        BigRational::new(num, den)
    }

    fn bernoulli<R: Rng + ?Sized>(p: &Self, rng: &mut R) -> bool {
        if !p.is_positive() {
            return false;
        }
        if *p >= Self::one() {
            return true;
        }
        let (num, den) = (p.numer().magnitude(), p.denom().magnitude());
        ExactPicker::from_integer_weights(&[num.clone(), den - num])
            .map(|picker| picker.pick(rng) == 0)
            .unwrap_or(false)
    }

    fn picker(weights: &[Self]) -> Option<ExactPicker> {
        let (ints, _) = common_denominator(weights);
        ExactPicker::from_integer_weights(&ints)
    }

    fn weighted(weights: &[Self]) -> Option<Weighted<Self>> {
        let (ints, denom) = common_denominator(weights);
        let picker = ExactPicker::from_integer_weights(&ints)?;
        let max = ints.iter().max().expect("nonempty");
        let (q, r) = picker.total.div_rem(max);
        let m_hat = q
            .to_u64()
            .unwrap_or(u64::MAX)
            .saturating_add(u64::from(!r.is_zero()));
        let total = BigRational::new(BigInt::from(picker.total.clone()), denom);
        Some(Weighted {
            picker,
            total,
            m_hat: m_hat.max(1),
        })
    }
}

// Integer weights `w_i · D` (negatives as zero) and the common denominator D.
fn common_denominator(weights: &[BigRational]) -> (Vec<BigUint>, BigInt) {
    let denom = weights
        .iter()
        .filter(|w| w.is_positive())
        .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let ints = weights
        .iter()
        .map(|w| {
            if w.is_positive() {
                (w.numer() * (&denom / w.denom()))
                    .to_biguint()
                    .expect("positive weight")
            } else {
                BigUint::zero()
            }
        })
        .collect();
    (ints, denom)
}

/// Uniform integer in `0..=bound`.
pub fn uniform_up_to<R: Rng + ?Sized>(bound: &BigUint, rng: &mut R) -> BigUint {
    rng.gen_biguint_below(&(bound + 1u32))
}

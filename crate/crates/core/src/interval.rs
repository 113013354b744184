use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::serde_big;

/// Closed interval `[lo, hi]` with exact rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "IntervalWire")]
pub struct RationalInterval {
    #[serde(with = "serde_big::rational")]
    lo: BigRational,
    #[serde(with = "serde_big::rational")]
    hi: BigRational,
}

#[derive(Deserialize)]
struct IntervalWire {
    #[serde(with = "serde_big::rational")]
    lo: BigRational,
    #[serde(with = "serde_big::rational")]
    hi: BigRational,
}

impl TryFrom<IntervalWire> for RationalInterval {
    type Error = String;

    fn try_from(w: IntervalWire) -> Result<Self, String> {
        RationalInterval::new(w.lo, w.hi).ok_or_else(|| "interval has lo > hi".to_string())
    }
}

impl RationalInterval {
    /// `None` when `lo > hi`.
    pub fn new(lo: BigRational, hi: BigRational) -> Option<Self> {
        (lo <= hi).then_some(Self { lo, hi })
    }

    pub fn point(v: BigRational) -> Self {
        Self { lo: v.clone(), hi: v }
    }

    pub fn zero() -> Self {
        Self::point(BigRational::zero())
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn contains_interval(&self, other: &RationalInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    /// `a·self + b` for `a ≥ 0`.
    pub fn affine(&self, a: &BigRational, b: &BigRational) -> Self {
        assert!(*a >= BigRational::zero(), "affine map must be monotone");
        Self {
            lo: a * &self.lo + b,
            hi: a * &self.hi + b,
        }
    }

    pub fn midpoint_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2)))
            .to_f64()
            .unwrap_or(f64::NAN)
    }
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{:.12}, {:.12}]",
            self.lo.to_f64().unwrap_or(f64::NAN),
            self.hi.to_f64().unwrap_or(f64::NAN)
        )
    }
}

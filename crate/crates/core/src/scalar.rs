//! Scalar types used for frequencies, distances and thresholds.
//!
//! Every statistic in this crate is a ratio of small integers (ball counts
//! over vertex counts, edge counts over vertex counts). The [`Scalar`] trait
//! lets the same code run over exact rationals, where identities such as the
//! disjoint-union mixture hold with zero tolerance, or over floats when
//! speed matters more than exactness.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive};

/// A signed ordered field element that can be built from integer ratios.
pub trait Scalar: num_traits::Num + Signed + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// `num / den`. `den` must be nonzero.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Lossy conversion for display and annealing objectives.
    fn to_f64(&self) -> f64;

    /// Whether arithmetic on this type is exact.
    const EXACT: bool;

    fn from_int(v: i64) -> Self {
        Self::from_ratio(v, 1)
    }

    /// `2^-exp`, computed by repeated halving so large exponents stay exact.
    fn half_pow(exp: u32) -> Self {
        let half = Self::from_ratio(1, 2);
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc * half.clone();
        }
        acc
    }
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    const EXACT: bool = false;
}

impl Scalar for f32 {
    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    const EXACT: bool = false;
}

/// Fixed-width rationals overflow on long mixture chains; prefer
/// [`BigRational`] unless the inputs are known to be small.
impl Scalar for Ratio<i64> {
    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(num, den)
    }
    fn to_f64(&self) -> f64 {
        self.numer().to_f64().unwrap_or(f64::NAN) / self.denom().to_f64().unwrap_or(f64::NAN)
    }
    const EXACT: bool = true;
}

impl Scalar for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Fall back for ratios whose parts overflow f64 individually.
            let num = self.numer().to_f64().unwrap_or(f64::INFINITY);
            let den = self.denom().to_f64().unwrap_or(f64::INFINITY);
            num / den
        })
    }
    const EXACT: bool = true;
}

/// Sum of a sequence of scalars.
pub fn sum<T: Scalar>(items: impl IntoIterator<Item = T>) -> T {
    items.into_iter().fold(T::zero(), |acc, x| acc + x)
}

pub(crate) fn max_of<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

pub(crate) fn is_unit_interval<T: Scalar>(x: &T) -> bool {
    *x >= T::zero() && *x <= T::one()
}

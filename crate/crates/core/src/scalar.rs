//! Numeric traits the learner and the evaluation code are generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive};

/// Floating point scalar used for thresholds, entropies and confidences.
pub trait Scalar:
    Float + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts a count or other small constant. Exact for integers below 2^24.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite constant")
    }

    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("count representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// A per-cue feature value: a raw count or an exact relative frequency.
pub trait FeatureValue: Clone + PartialEq + Debug + Display + Send + Sync {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;

    /// Converts to the learner's scalar type.
    fn to_scalar<T: Scalar>(&self) -> T {
        T::of(self.to_f64())
    }
}

impl FeatureValue for u64 {
    fn zero() -> Self {
        0
    }

    fn is_zero(&self) -> bool {
        *self == 0
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl FeatureValue for Ratio<u64> {
    fn zero() -> Self {
        Ratio::from_integer(0)
    }

    fn is_zero(&self) -> bool {
        *self.numer() == 0
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn to_scalar<T: Scalar>(&self) -> T {
        T::of(*self.numer() as f64) / T::of(*self.denom() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_converts_exactly_for_small_terms() {
        let r = Ratio::new(1u64, 2);
        assert_eq!(r.to_scalar::<f64>(), 0.5);
        assert_eq!(r.to_scalar::<f32>(), 0.5f32);
        assert_eq!(7u64.to_scalar::<f64>(), 7.0);
    }
}

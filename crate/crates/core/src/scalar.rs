//! Numeric abstraction shared by the graph model and the QuAD evaluator.
//!
//! Base weights and acceptability degrees only need field arithmetic and an
//! order, so the semantics run unchanged over `f32`, `f64` or an exact
//! rational such as [`num_rational::Rational64`]. Rank metrics need square
//! roots and stay on [`num_traits::Float`].

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Scalar usable as a base weight or acceptability degree.
pub trait Weight:
    Num + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// The neutral base weight, exactly one half.
    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }

    /// `true` iff `0 <= self <= 1`. NaN is never in range.
    fn in_unit_interval(&self) -> bool {
        *self >= Self::zero() && *self <= Self::one()
    }

    /// Lossy view used for reporting and serialization.
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Weight for T where
    T: Num + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn half_is_exact() {
        assert_eq!(f64::half(), 0.5);
        assert_eq!(f32::half(), 0.5);
        assert_eq!(Rational64::half(), Rational64::new(1, 2));
    }

    #[test]
    fn unit_interval_rejects_nan() {
        assert!(!f64::NAN.in_unit_interval());
        assert!(!(-0.1f64).in_unit_interval());
        assert!(1.0f64.in_unit_interval());
        assert!(Rational64::new(3, 4).in_unit_interval());
        assert!(!Rational64::new(5, 4).in_unit_interval());
    }
}

//! Scalar abstraction shared by the solver, flow and tiling code.
//!
//! Every numeric routine in the crate is written once against [`Scalar`] and
//! instantiated for `f64`/`f32` (the float pipeline) and [`Rational`] (the exact
//! oracle). Tolerances collapse to zero for exact types, so the same audit code
//! checks float results within a band and rational results for equality.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Arbitrary-precision rational used by the exact pipeline.
pub type Rational = BigRational;

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// `true` when arithmetic is exact (no rounding).
    const EXACT: bool;

    /// Lossless for exact types, nearest value for floats.
    fn from_f64(value: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn floor(&self) -> Self;

    /// Absolute tolerance used when comparing values that agree in exact
    /// arithmetic. Zero for exact types.
    fn epsilon_for(tol: f64) -> Self {
        if Self::EXACT {
            Self::zero()
        } else {
            Self::from_f64(tol)
        }
    }

    /// Fractional part in `[0, 1)`.
    fn fract_unit(&self) -> Self {
        let f = self.clone() - self.floor();
        // Float rounding can produce exactly 1.0 for tiny negative inputs.
        if f >= Self::one() {
            f - Self::one()
        } else {
            f
        }
    }

    /// Signed distance to the nearest integer, in `[-1/2, 1/2]`.
    fn circular_offset(&self) -> Self {
        let f = self.fract_unit();
        let half = Self::one() / (Self::one() + Self::one());
        if f > half {
            f - Self::one()
        } else {
            f
        }
    }

    fn from_usize(n: usize) -> Self {
        let mut acc = Self::zero();
        // Binary expansion keeps this exact for every implementor.
        let mut bit = Self::one();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc + bit.clone();
            }
            bit = bit.clone() + bit;
            n >>= 1;
        }
        acc
    }

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if a <= b {
            a
        } else {
            b
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_f64(value: f64) -> Self {
        value
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn floor(&self) -> Self {
        f64::floor(*self)
    }

    fn from_usize(n: usize) -> Self {
        n as f64
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_f64(value: f64) -> Self {
        value as f32
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn floor(&self) -> Self {
        f32::floor(*self)
    }

    fn from_usize(n: usize) -> Self {
        n as f32
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    /// Panics on non-finite input.
    fn from_f64(value: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(value)
            .unwrap_or_else(|| panic!("cannot represent {value} as a rational"))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn floor(&self) -> Self {
        BigRational::floor(self)
    }

    fn from_usize(n: usize) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

/// Exact rational `num / den`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Converts between scalar types through `f64` unless both sides are exact
/// rationals of the same type.
pub fn convert<A: Scalar, B: Scalar>(value: &A) -> B {
    B::from_f64(value.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn fract_unit_wraps_negative_values() {
        assert_eq!((-0.25f64).fract_unit(), 0.75);
        assert_eq!(ratio(-1, 4).fract_unit(), ratio(3, 4));
        assert_eq!(ratio(7, 3).fract_unit(), ratio(1, 3));
    }

    #[test]
    fn circular_offset_is_signed_distance_to_integer() {
        assert_eq!(ratio(9, 10).circular_offset(), ratio(-1, 10));
        assert!((0.999_999_f64.circular_offset() + 1e-6).abs() < 1e-12);
        assert_eq!(2.0f64.circular_offset(), 0.0);
    }

    #[test]
    fn rational_from_f64_is_exact_for_dyadics() {
        assert_eq!(<Rational as Scalar>::from_f64(0.375), ratio(3, 8));
        assert_eq!(<Rational as Scalar>::from_usize(12), ratio(12, 1));
    }

    #[test]
    fn epsilon_collapses_for_exact_types() {
        assert!(Rational::epsilon_for(1e-7).is_zero());
        assert_eq!(f64::epsilon_for(1e-7), 1e-7);
    }
}

//! Floating point scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{StandardNormal, StandardUniform};

/// A real scalar: `f32` or `f64`.
///
/// Built on nalgebra's `RealField` (itself layered on num-traits) so that the
/// same code drives eigendecompositions and elementwise math. Random draws are
/// routed through the trait because rand's distribution impls cannot be
/// expressed as supertraits.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + FromStr + Send + Sync + 'static
{
    /// Converts an `f64` literal. Infallible for the two implementors.
    fn lit(v: f64) -> Self;

    /// Converts a count.
    fn from_count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    fn as_f64(self) -> f64;

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform on `[0, 1)`.
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Shortest decimal representation that parses back to the same value.
    fn to_decimal(self) -> String {
        format!("{self:?}")
    }

    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn lit(v: f64) -> Self {
                v as $t
            }

            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }

            #[inline]
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.sample(StandardNormal)
            }

            #[inline]
            fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.sample(StandardUniform)
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_round_trip_is_exact() {
        for v in [0.1f64, 1.0 / 3.0, 1e-300, 7.0, -2.5e17, f64::MIN_POSITIVE] {
            assert_eq!(f64::parse_decimal(&v.to_decimal()), Some(v));
        }
        for v in [0.1f32, 1.0 / 3.0, 3.4e38] {
            assert_eq!(f32::parse_decimal(&v.to_decimal()), Some(v));
        }
    }
}

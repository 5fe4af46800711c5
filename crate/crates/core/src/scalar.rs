//! Floating point scalars the simulators and estimators are generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// A real scalar: `f32` or `f64`.
///
/// Besides the usual float arithmetic this knows how to turn raw generator
/// bits into a uniform variate that can never round onto 0 or 1, which keeps
/// `-ln(u)` finite and strictly positive for every precision.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Bits of mantissa precision, including the implicit bit.
    const MANTISSA_DIGITS: u32;

    /// Uniform variate strictly inside `(0, 1)` from 64 random bits.
    fn open_unit(bits: u64) -> Self;

    /// Lossless for `f64`, rounding for `f32`.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to every float scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("float scalar converts to f64")
    }

    #[inline]
    fn of_usize(v: usize) -> Self {
        Self::of(v as f64)
    }
}

impl Scalar for f32 {
    const MANTISSA_DIGITS: u32 = f32::MANTISSA_DIGITS;

    #[inline]
    fn open_unit(bits: u64) -> Self {
        // 23 bits plus a half step: largest value 1 - 2^-24 is representable.
        ((bits >> 41) as f32 + 0.5) * (1.0 / (1u64 << 23) as f32)
    }
}

impl Scalar for f64 {
    const MANTISSA_DIGITS: u32 = f64::MANTISSA_DIGITS;

    #[inline]
    fn open_unit(bits: u64) -> Self {
        ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
    }
}

//! Numeric abstraction shared by the signal and feature code.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Floating point type the signal pipeline can run on (`f32` or `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + FftNum + Default + fmt::Debug + fmt::Display + Sum<Self>
{
}

impl<T> Scalar for T where
    T: Float + FloatConst + FromPrimitive + FftNum + Default + fmt::Debug + fmt::Display + Sum<T>
{
}

/// Converts an `f64` constant into the working scalar type.
#[inline]
pub fn lit<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("constant representable in scalar type")
}

#[inline]
pub(crate) fn from_usize<T: Scalar>(v: usize) -> T {
    T::from_usize(v).expect("count representable in scalar type")
}

#[inline]
pub(crate) fn to_f64<T: Scalar>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

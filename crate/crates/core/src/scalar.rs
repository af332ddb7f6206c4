//! Scalar abstraction for pixel coordinates and metric values.
//!
//! All continuous math in this crate (box geometry, distances, depths,
//! metrics) is generic over [`Scalar`]. Scale values stay `i32` decimeters
//! and raster indices stay unsigned integers regardless of the scalar.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Lossless-enough conversion from small integers; panics only if the
/// scalar type cannot represent any i32, which neither f32 nor f64 hits.
#[inline]
pub(crate) fn num<T: Scalar>(v: i32) -> T {
    T::from_i32(v).expect("i32 representable in scalar")
}

#[inline]
pub(crate) fn num_u32<T: Scalar>(v: u32) -> T {
    T::from_u32(v).expect("u32 representable in scalar")
}

#[inline]
pub(crate) fn num_usize<T: Scalar>(v: usize) -> T {
    T::from_usize(v).expect("usize representable in scalar")
}

//! Numeric traits the algorithms are written against.

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// Ordered field elements: `f32`, `f64`, or an exact rational such as
/// `num_rational::Ratio<i64>`.
pub trait Scalar:
    Copy + PartialOrd + Num + FromPrimitive + ToPrimitive + Debug + Send + Sync
{
}

impl<T> Scalar for T where
    T: Copy + PartialOrd + Num + FromPrimitive + ToPrimitive + Debug + Send + Sync
{
}

/// Floating-point scalars, for anything that needs square roots or angles.
pub trait Real: Scalar + Float + FloatConst {}

impl<T> Real for T where T: Scalar + Float + FloatConst {}

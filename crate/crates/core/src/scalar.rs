//! Scalar abstractions shared by every module.
//!
//! Closed-form quantities only need field arithmetic and work with exact
//! rationals; everything that takes square roots, exponentials or draws
//! random numbers requires [`Real`] (`f32` or `f64`).

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};

/// Field arithmetic with ordering. Implemented for floats and for
/// `num_rational::Ratio` alike.
pub trait Field: Num + Copy + PartialOrd + Debug {}

impl<T> Field for T where T: Num + Copy + PartialOrd + Debug {}

/// Floating point scalar: f32 or f64.
pub trait Real:
    Field + Float + FloatConst + FromPrimitive + ToPrimitive + Display + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline(always)]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Lossy conversion to `f64` for statistics and reporting.
#[inline(always)]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn two<T: Field>() -> T {
    T::one() + T::one()
}

pub(crate) fn four<T: Field>() -> T {
    two::<T>() * two::<T>()
}

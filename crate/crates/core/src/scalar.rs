//! Scalar abstraction: all geometry and bound arithmetic is generic over a
//! floating-point type, instantiated as `f32` or `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::distr::uniform::SampleUniform;

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + SampleUniform + Debug + Display + Send + Sync + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

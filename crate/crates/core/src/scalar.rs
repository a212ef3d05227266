//! Scalar abstraction shared by every solver in the crate.
//!
//! All numerical routines are generic over [`Scalar`], which is implemented for
//! `f32` and `f64`. Constants are written as `f64` literals and lifted with
//! [`Scalar::lit`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lift an `f64` constant into the scalar type.
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("constant representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative precision used for tie-breaking and degeneracy tests.
    fn tie_eps() -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn tie_eps() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    #[inline]
    fn tie_eps() -> Self {
        1e-5
    }
}

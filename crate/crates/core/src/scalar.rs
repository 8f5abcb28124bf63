//! Scalar abstraction for the precision-agnostic numerical kernels.
//!
//! The bath kernels, the Markov-chain stationary solver, the dip detector and
//! the one-dimensional minimizer work for any IEEE float. The dense
//! operator algebra is pinned to `f64` (see [`crate::Real`]).

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

//! Scalar abstraction shared by every probabilistic component.
//!
//! Models, tables and the decoder are generic over [`Real`], so the same code
//! runs in `f64` (the default everywhere in the pipeline) or `f32` when a
//! smaller footprint matters more than the last digits.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used for probabilities, weights and costs.
pub trait Real:
    Float + NumAssign + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`. Out-of-range values saturate to infinity.
    fn of(value: f64) -> Self {
        Self::from_f64(value).unwrap_or_else(Self::infinity)
    }

    fn of_usize(value: usize) -> Self {
        Self::from_usize(value).unwrap_or_else(Self::infinity)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float + NumAssign + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip_small_integers() {
        assert_eq!(<f32 as Real>::of_usize(7), 7.0f32);
        assert_eq!(<f64 as Real>::of(0.25).as_f64(), 0.25);
    }
}

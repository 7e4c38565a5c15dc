use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use num::{BigRational, One, Zero};

/// Arithmetic the solver runs in. `f64` is the default; `BigRational` gives
/// exact results for cross-checking.
pub trait Weight:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
{
    /// Converts a probability given as a double.
    fn from_probability(p: f64) -> Self;

    fn to_f64(&self) -> f64;
}

impl Weight for f64 {
    fn from_probability(p: f64) -> f64 {
        p
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Weight for BigRational {
    /// The exact binary value of `p`; `0.1` becomes `3602879701896397 / 2^55`.
    fn from_probability(p: f64) -> BigRational {
        BigRational::from_float(p).expect("probabilities are finite")
    }

    fn to_f64(&self) -> f64 {
        num::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

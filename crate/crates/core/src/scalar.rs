use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar used for energies, messages and pseudo-marginals.
///
/// Implemented for `f32` and `f64`. Every algorithm in the crate is generic
/// over it; the crate root exposes `f64` aliases for the common case.
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + FromStr + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for the finite constants used in this crate.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    /// Minimum of two values, without NaN special-casing.
    #[inline]
    fn min2(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Default tolerance for energy comparisons.
pub const ENERGY_TOL: f64 = 1e-9;

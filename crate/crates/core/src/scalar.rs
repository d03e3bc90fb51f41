//! The two coefficient flavors: exact rationals and double-precision reals.

use std::fmt::Debug;
use std::ops::Neg;

use num_traits::{FromPrimitive, Num, Zero};

use crate::arith::{rational_to_f64, Rational};

pub trait Scalar:
    Clone + Debug + PartialEq + Num + Neg<Output = Self> + FromPrimitive + Send + Sync + 'static
{
    /// Whether arithmetic in this flavor is exact.
    const EXACT: bool;

    fn to_f64(&self) -> f64;

    /// Pivot test used by elimination: exact zero for rationals, a relative
    /// threshold for floats.
    fn is_negligible(&self, scale: f64) -> bool;
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn is_negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }
}

pub const FLOAT_PIVOT_THRESHOLD: f64 = 1e-12;

impl Scalar for f64 {
    const EXACT: bool = false;

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_negligible(&self, scale: f64) -> bool {
        self.abs() <= FLOAT_PIVOT_THRESHOLD * scale.max(1.0)
    }
}

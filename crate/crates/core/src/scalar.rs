//! Floating point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the solvers and inference routines are generic over.
///
/// Implemented for `f32` and `f64`. The associated tolerances are scaled to
/// the precision of the type so that the same algorithm code runs for both.
pub trait Scalar:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Feasibility / optimality tolerance of the simplex solver.
    const LP_TOL: Self;
    /// Pivot magnitude below which a tableau entry is treated as zero.
    const PIVOT_TOL: Self;
    /// Guard used when a division would blow up in the inference recursions.
    const GUARD: Self;
    /// Optimality tolerance for the nonnegative least squares solver.
    const KKT_TOL: Self;

    /// Lossless-enough conversion from `f64` literals and data.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable")
    }

    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize is representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Clamp into the closed unit interval, mapping NaN to zero.
    fn clamp_unit(self) -> Self {
        if self.is_nan() {
            Self::zero()
        } else {
            self.max(Self::zero()).min(Self::one())
        }
    }
}

impl Scalar for f64 {
    const LP_TOL: Self = 1e-9;
    const PIVOT_TOL: Self = 1e-11;
    const GUARD: Self = 1e-12;
    const KKT_TOL: Self = 1e-10;
}

impl Scalar for f32 {
    const LP_TOL: Self = 1e-5;
    const PIVOT_TOL: Self = 1e-6;
    const GUARD: Self = 1e-6;
    const KKT_TOL: Self = 1e-5;
}

//! Floating point abstraction shared by the analytic modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Real scalar used by the degree-distribution and percolation analytics.
///
/// Implemented for `f32` and `f64`. Tolerances that the analytics pin in
/// double precision (for instance the 1e-12 normalization check) are
/// widened to a few ulps of the type through [`Scalar::tol`].
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant. Every finite `f64` maps onto a value of
    /// the target type, possibly rounded.
    #[inline]
    fn c(value: f64) -> Self {
        Self::from_f64(value).expect("finite constant")
    }

    /// `value`, but never tighter than 64 machine epsilons of `Self`.
    #[inline]
    fn tol(value: f64) -> Self {
        Self::c(value).max(Self::epsilon() * Self::c(64.0))
    }

    #[inline]
    fn from_usize_exact(k: usize) -> Self {
        Self::from_usize(k).expect("degree fits the scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Neumaier (improved Kahan) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<S> {
    sum: S,
    carry: S,
}

impl<S: Scalar> CompensatedSum<S> {
    pub fn new() -> Self {
        Self {
            sum: S::zero(),
            carry: S::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: S) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> S {
        self.sum + self.carry
    }
}

impl<S: Scalar> FromIterator<S> for CompensatedSum<S> {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<S: Scalar, I: IntoIterator<Item = S>>(iter: I) -> S {
    iter.into_iter().collect::<CompensatedSum<S>>().value()
}

//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::ToPrimitive;

/// Real field the toolkit computes over (`f32` or `f64`).
///
/// Tolerances throughout the crate are written for `f64`; `f32` works for
/// the algorithms but most of the pinned thresholds are below its epsilon.
pub trait Real: RealField + Copy + ToPrimitive + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over a [`Real`] field.
pub type Cx<S> = Complex<S>;

pub(crate) fn cx<S: Real>(re: S, im: S) -> Cx<S> {
    Complex::new(re, im)
}

pub(crate) fn re<S: Real>(x: S) -> Cx<S> {
    Complex::new(x, S::zero())
}

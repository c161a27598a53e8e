//! Scalar abstraction for the linear-algebra layer.
//!
//! Everything in [`crate::tensor`] and [`crate::channels`] is written against
//! [`Real`], so the same code runs in `f32` (fast, loose) and `f64` (the default
//! used by the optimizers and reports).

use nalgebra::{Complex, DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default {
    /// Tolerance used when validating structural invariants (Hermiticity,
    /// positivity, normalization) at this precision.
    fn validation_tol() -> Self;

    /// Tolerance for orthonormality of frames.
    fn tight_tol() -> Self;

    /// Tolerance on the squared norm of a pure state.
    fn norm_tol() -> Self;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f64 {
    fn validation_tol() -> Self {
        1e-9
    }
    fn tight_tol() -> Self {
        1e-10
    }
    fn norm_tol() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn validation_tol() -> Self {
        1e-4
    }
    fn tight_tol() -> Self {
        1e-4
    }
    fn norm_tol() -> Self {
        1e-5
    }
}

pub type C<T = f64> = Complex<T>;
pub type CMatrix<T = f64> = DMatrix<Complex<T>>;
pub type CVector<T = f64> = DVector<Complex<T>>;

pub fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

pub fn cr<T: Real>(re: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::zero())
}

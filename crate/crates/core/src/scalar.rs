//! Scalar abstraction shared by every state, field and measurement type.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Debug + Display + Default + Send + Sync + 'static
{
    /// Rounding tolerance for "equal up to arithmetic error" decisions.
    const TOL: f64;

    /// Converts an `f64` constant into this scalar.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn tol() -> Self {
        Self::lit(Self::TOL)
    }
}

impl Real for f32 {
    const TOL: f64 = 1e-5;
}

impl Real for f64 {
    const TOL: f64 = 1e-12;
}

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Reduces an angle to the half-open interval (-pi, pi].
pub fn wrap_phase<T: Real>(phi: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut r = phi % two_pi;
    if r <= -T::PI() {
        r = r + two_pi;
    } else if r > T::PI() {
        r = r - two_pi;
    }
    r
}

//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::Serialize;

/// Real floating-point scalar the symbol calculus is generic over.
///
/// Implemented for `f32` and `f64`. Tolerances throughout the crate are given
/// as `f64` and converted with [`Real::lit`], so `f32` instantiations run but
/// saturate at single-precision accuracy.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Default + Debug + Display + Sum + Send + Sync + Serialize + 'static
{
    /// Converts an `f64` constant into this scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable in scalar type")
    }

    /// Lossy conversion back to `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Largest `u` such that `exp(u)` and `exp(-u)` are finite normal numbers.
    #[inline]
    fn max_log() -> Self {
        Self::max_value().ln()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Scalars that can also drive the FFT backend.
///
/// Kept separate from [`Real`] because `rustfft::FftNum` pulls in
/// `num_traits::Signed`, whose `abs` would otherwise clash with `Float::abs`
/// in every generic body.
pub trait FftReal: Real + rustfft::FftNum {}
impl<T: Real + rustfft::FftNum> FftReal for T {}

/// Complex value over a [`Real`] scalar.
pub type Cx<T> = Complex<T>;

#[inline]
pub(crate) fn cx<T: Real>(re: T) -> Cx<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub(crate) fn cone<T: Real>() -> Cx<T> {
    Complex::new(T::one(), T::zero())
}

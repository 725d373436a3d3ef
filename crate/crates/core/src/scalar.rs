//! Scalar abstractions shared by every solver.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, Div, DivAssign, Mul, MulAssign, Neg, RemAssign, SubAssign};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, Num};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + RemAssign
    + Value<Self>
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only for unrepresentable values,
    /// which never happens for the finite constants used in this crate.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Value carried by a signal: either a real scalar or a complex number over
/// the same real type. The Volterra solvers are written once against this.
pub trait Value<T: Real>:
    Copy
    + Num
    + Neg<Output = Self>
    + Mul<T, Output = Self>
    + Div<T, Output = Self>
    + AddAssign
    + Debug
    + Send
    + Sync
{
    fn from_real(x: T) -> Self;
    fn modulus(&self) -> T;
    fn real_part(&self) -> T;
    fn imag_part(&self) -> T;
    fn conjugate(&self) -> Self;

    fn is_finite(&self) -> bool {
        self.real_part().is_finite() && self.imag_part().is_finite()
    }
}

macro_rules! real_value {
    ($t:ty) => {
        impl Value<$t> for $t {
            #[inline]
            fn from_real(x: $t) -> Self {
                x
            }
            #[inline]
            fn modulus(&self) -> $t {
                self.abs()
            }
            #[inline]
            fn real_part(&self) -> $t {
                *self
            }
            #[inline]
            fn imag_part(&self) -> $t {
                0.0
            }
            #[inline]
            fn conjugate(&self) -> Self {
                *self
            }
        }
    };
}

real_value!(f32);
real_value!(f64);

impl<T: Real> Value<T> for Complex<T> {
    #[inline]
    fn from_real(x: T) -> Self {
        Complex::new(x, T::zero())
    }
    #[inline]
    fn modulus(&self) -> T {
        self.norm()
    }
    #[inline]
    fn real_part(&self) -> T {
        self.re
    }
    #[inline]
    fn imag_part(&self) -> T {
        self.im
    }
    #[inline]
    fn conjugate(&self) -> Self {
        self.conj()
    }
}

/// `sinh(x·d)/d`, continuous through `d = 0`.
pub(crate) fn sinhc<T: Real>(x: T, d: Complex<T>) -> Complex<T> {
    let xd = d * x;
    if xd.norm() < T::lit(1e-3) {
        let s = xd * xd;
        (Complex::from(T::one()) + s / T::lit(6.0) + s * s / T::lit(120.0)) * x
    } else {
        xd.sinh() / d
    }
}

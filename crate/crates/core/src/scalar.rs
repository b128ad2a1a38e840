//! Scalar abstraction shared by the special-function and state-algebra layers.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::Mul;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking only on non-representable input.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Argument type for polynomial evaluation: a real scalar or a complex number over it.
pub trait PolyArg<T: Real>: Copy + Num + Mul<T, Output = Self> + From<T> + Send + Sync {}

impl<T: Real, Z> PolyArg<T> for Z where Z: Copy + Num + Mul<T, Output = Z> + From<T> + Send + Sync {}

/// `z^k` for a complex base and non-negative integer exponent, with `0^0 = 1`.
#[inline]
pub fn cpowu<T: Real>(z: Complex<T>, k: usize) -> Complex<T> {
    let mut acc = Complex::new(T::one(), T::zero());
    let mut base = z;
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}

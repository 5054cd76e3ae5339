//! Scalar abstraction shared by the polynomial, measure and moment code.
//!
//! Everything that only needs field arithmetic plus a handful of elementary
//! functions is written against [`Real`], so the same code runs in `f32`,
//! `f64` and (with the `extended` feature) double-double precision, see
//! [`crate::dd`].

use std::fmt::Debug;

use num_complex::Complex;
use num_traits::{FromPrimitive, Num, NumAssign, Signed};

/// Real scalar used as the component type of [`Complex`].
pub trait Real:
    Num + NumAssign + Signed + FromPrimitive + Copy + PartialOrd + Debug + Send + Sync + 'static
{
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn atan2(self, other: Self) -> Self;
    fn epsilon() -> Self;
    fn pi() -> Self;
    fn to_f64(self) -> f64;

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts into every Real")
    }

    fn hypot(self, other: Self) -> Self {
        let (a, b) = (self.abs(), other.abs());
        let (big, small) = if a > b { (a, b) } else { (b, a) };
        if big.is_zero() {
            return big;
        }
        let r = small / big;
        big * (Self::one() + r * r).sqrt()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

macro_rules! impl_real_for_primitive {
    ($t:ty, $pi:expr) => {
        impl Real for $t {
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            fn exp(self) -> Self {
                <$t>::exp(self)
            }
            fn ln(self) -> Self {
                <$t>::ln(self)
            }
            fn sin(self) -> Self {
                <$t>::sin(self)
            }
            fn cos(self) -> Self {
                <$t>::cos(self)
            }
            fn atan2(self, other: Self) -> Self {
                <$t>::atan2(self, other)
            }
            fn epsilon() -> Self {
                <$t>::EPSILON
            }
            fn pi() -> Self {
                $pi
            }
            fn to_f64(self) -> f64 {
                self as f64
            }
            fn hypot(self, other: Self) -> Self {
                <$t>::hypot(self, other)
            }
        }
    };
}

impl_real_for_primitive!(f32, std::f32::consts::PI);
impl_real_for_primitive!(f64, std::f64::consts::PI);

/// Modulus of a complex number without overflow in the intermediate square.
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

/// Argument in `(-pi, pi]`.
pub fn carg<T: Real>(z: Complex<T>) -> T {
    z.im.atan2(z.re)
}

/// Principal square root.
pub fn csqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    let two = T::one() + T::one();
    let r = cabs(z);
    if r.is_zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let re = ((r + z.re) / two).sqrt();
    let im = ((r - z.re) / two).sqrt();
    if z.im < T::zero() || (z.im.is_zero() && z.im.is_negative()) {
        Complex::new(re, -im)
    } else {
        Complex::new(re, im)
    }
}

pub fn cexp<T: Real>(z: Complex<T>) -> Complex<T> {
    let m = z.re.exp();
    Complex::new(m * z.im.cos(), m * z.im.sin())
}

pub fn cfrom<T: Real>(z: Complex<f64>) -> Complex<T> {
    Complex::new(T::from_f64_lossy(z.re), T::from_f64_lossy(z.im))
}

pub fn cto64<T: Real>(z: Complex<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

//! Double-double scalar for the moment/Hankel code.
//!
//! Thin wrapper around `twofloat::TwoFloat`. Addition and multiplication are
//! delegated; division is redone as a long division with two exact
//! correction steps because the upstream quotient loses the low word when
//! the reciprocal residual is computed without a fused multiply-add.
//! Transcendental functions come from upstream (about 1e-18 relative).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use num_traits::{FromPrimitive, Num, One, Signed, Zero};
use twofloat::TwoFloat;

use crate::scalar::Real;

#[derive(Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble(pub TwoFloat);

impl DoubleDouble {
    pub fn hi(self) -> f64 {
        self.0.hi()
    }

    pub fn lo(self) -> f64 {
        self.0.lo()
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi(), self.lo())
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self(TwoFloat::from(x))
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! delegate {
    ($tr:ident, $f:ident, $atr:ident, $af:ident) => {
        impl $tr for DoubleDouble {
            type Output = Self;
            fn $f(self, rhs: Self) -> Self {
                Self($tr::$f(self.0, rhs.0))
            }
        }
        impl $atr for DoubleDouble {
            fn $af(&mut self, rhs: Self) {
                *self = $tr::$f(*self, rhs);
            }
        }
    };
}

delegate!(Add, add, AddAssign, add_assign);
delegate!(Sub, sub, SubAssign, sub_assign);
delegate!(Mul, mul, MulAssign, mul_assign);

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let b = rhs.0;
        let q1 = self.0.hi() / b.hi();
        let r = self.0 - b * q1;
        let q2 = r.hi() / b.hi();
        let r = r - b * q2;
        let q3 = r.hi() / b.hi();
        Self(TwoFloat::new_add(q1, q2) + q3)
    }
}

impl DivAssign for DoubleDouble {
    fn div_assign(&mut self, rhs: Self) {
        *self = *self / rhs;
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        let q = (self / rhs).0.trunc();
        Self(self.0 - q * rhs.0)
    }
}

impl RemAssign for DoubleDouble {
    fn rem_assign(&mut self, rhs: Self) {
        *self = *self % rhs;
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl Zero for DoubleDouble {
    fn zero() -> Self {
        Self(TwoFloat::from(0.0))
    }
    fn is_zero(&self) -> bool {
        self.0.hi() == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        Self(TwoFloat::from(1.0))
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, _radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        s.parse::<f64>().map(Self::from)
    }
}

impl Signed for DoubleDouble {
    fn abs(&self) -> Self {
        Self(self.0.abs())
    }
    fn abs_sub(&self, other: &Self) -> Self {
        if *self <= *other {
            Self::zero()
        } else {
            *self - *other
        }
    }
    fn signum(&self) -> Self {
        if self.is_zero() {
            Self::zero()
        } else if self.hi() > 0.0 {
            Self::one()
        } else {
            -Self::one()
        }
    }
    fn is_positive(&self) -> bool {
        self.hi() > 0.0
    }
    fn is_negative(&self) -> bool {
        self.hi() < 0.0 || (self.hi() == 0.0 && self.hi().is_sign_negative())
    }
}

impl FromPrimitive for DoubleDouble {
    fn from_i64(n: i64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n - hi as i64) as f64;
        Some(Self(TwoFloat::new_add(hi, lo)))
    }
    fn from_u64(n: u64) -> Option<Self> {
        let hi = n as f64;
        let lo = n.wrapping_sub(hi as u64) as i64 as f64;
        Some(Self(TwoFloat::new_add(hi, lo)))
    }
    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then(|| Self::from(x))
    }
}

impl Real for DoubleDouble {
    fn sqrt(self) -> Self {
        if self.hi() <= 0.0 {
            return Self::zero();
        }
        // one Newton step on top of the upstream estimate
        let s = Self(self.0.sqrt());
        s + (self - s * s) / (s + s)
    }
    fn exp(self) -> Self {
        Self(self.0.exp())
    }
    fn ln(self) -> Self {
        Self(self.0.ln())
    }
    fn sin(self) -> Self {
        Self(self.0.sin())
    }
    fn cos(self) -> Self {
        Self(self.0.cos())
    }
    fn atan2(self, other: Self) -> Self {
        Self(self.0.atan2(other.0))
    }
    fn epsilon() -> Self {
        Self::from(2f64.powi(-104))
    }
    fn pi() -> Self {
        Self(twofloat::consts::PI)
    }
    fn to_f64(self) -> f64 {
        self.hi() + self.lo()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_keeps_the_low_word() {
        let third = DoubleDouble::from(1.0) / DoubleDouble::from(3.0);
        let back = third * DoubleDouble::from(3.0) - DoubleDouble::one();
        assert!(back.to_f64().abs() < 1e-31, "{back:?}");
        let x = DoubleDouble::from(2.0).sqrt();
        assert!((x * x - DoubleDouble::from(2.0)).to_f64().abs() < 1e-31);
    }

    #[test]
    fn transcendentals_beat_f64() {
        let e = DoubleDouble::one().exp();
        // e = 2.718281828459045 + 1.4456468917292502e-16
        let err = (e - DoubleDouble(TwoFloat::new_add(std::f64::consts::E, 1.4456468917292502e-16))).to_f64();
        assert!(err.abs() < 1e-16);
    }
}

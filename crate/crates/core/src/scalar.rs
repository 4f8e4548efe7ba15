//! The scalar contract every evaluator is written against.
//!
//! Four backends implement it: `f64`, [`Complex64`], [`Rational`] and
//! [`QuadraticNumber`](crate::exactnum::QuadraticNumber). Exact backends
//! compare identically; float backends compare within a relative tolerance.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{rational_sqrt, Rational};

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic is carried out without rounding.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn is_zero(&self) -> bool;

    /// Absolute value (modulus for complex), as a float. Used for pivoting
    /// and residual reporting only.
    fn magnitude(&self) -> f64;

    /// Rejects non-finite float results. Exact backends never fail.
    fn check_finite(self, what: &'static str) -> Result<Self> {
        if Self::EXACT || self.magnitude().is_finite() {
            Ok(self)
        } else {
            Err(Error::Overflow(what))
        }
    }

    /// Integer power by squaring; negative exponents invert.
    fn powi(&self, exp: i64) -> Self {
        let mut base = if exp < 0 {
            Self::one() / self.clone()
        } else {
            self.clone()
        };
        let mut e = exp.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    /// `|a - b| / max(1, |a|, |b|)`. Exact backends report `0.0` exactly
    /// when the values are identical and a strictly positive number otherwise.
    fn deviation(&self, other: &Self) -> f64 {
        let diff = (self.clone() - other.clone()).magnitude();
        let scale = 1f64.max(self.magnitude()).max(other.magnitude());
        let dev = diff / scale;
        if Self::EXACT && self != other && !(dev > 0.0) {
            f64::MIN_POSITIVE
        } else {
            dev
        }
    }

    /// Identical equality for exact backends, relative tolerance otherwise.
    fn agrees(&self, other: &Self, rel_tol: f64) -> bool {
        if Self::EXACT {
            self == other
        } else {
            self.deviation(other) <= rel_tol
        }
    }
}

/// An ordered scalar with a (possibly partial) square root.
pub trait RealScalar: Scalar + PartialOrd + Display {
    /// Non-negative square root. Exact backends fail with
    /// [`Error::NotAPerfectSquare`] when the root leaves the field.
    fn sqrt(&self) -> Result<Self>;

    fn to_f64(&self) -> f64;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn magnitude(&self) -> f64 {
        f64::abs(*self)
    }
    fn powi(&self, exp: i64) -> Self {
        f64::powi(*self, exp as i32)
    }
}

impl RealScalar for f64 {
    fn sqrt(&self) -> Result<Self> {
        if *self < 0.0 {
            Err(Error::NegativeRadicand(self.to_string()))
        } else {
            Ok(f64::sqrt(*self))
        }
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(n: i64) -> Self {
        Rational::from_integer(n.into())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn magnitude(&self) -> f64 {
        ToPrimitive::to_f64(&Signed::abs(self)).unwrap_or(f64::INFINITY)
    }
}

impl RealScalar for Rational {
    fn sqrt(&self) -> Result<Self> {
        if self.is_negative() {
            return Err(Error::NegativeRadicand(self.to_string()));
        }
        rational_sqrt(self).ok_or_else(|| Error::NotAPerfectSquare(self.to_string()))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

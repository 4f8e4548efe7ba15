//! Exact arithmetic: arbitrary-precision rationals, the quadratic field
//! Q(sqrt D), and a dense Gaussian-elimination solver generic over
//! [`Scalar`](crate::scalar::Scalar).

mod linsolve;
mod quadratic;

pub use linsolve::{linear_solve, mat_vec};
pub use quadratic::{quad_sqrt, QuadField, QuadraticNumber};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Reduced arbitrary-precision fraction with positive denominator.
pub type Rational = num_rational::BigRational;

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

fn bigint_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = num_integer::Roots::sqrt(n);
    (&r * &r == *n).then_some(r)
}

/// Rational square root when `r` is the square of a rational.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    // Ratio keeps itself reduced, so numerator and denominator must both be squares.
    let num = bigint_sqrt(r.numer())?;
    let den = bigint_sqrt(r.denom())?;
    Some(Rational::new(num, den))
}

/// Parses `p`, `p/q` or a plain decimal such as `-0.375` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        if !int_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{int_digits}{frac_part}").parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac_part.len());
        let value = Rational::new(digits, scale);
        return Ok(if negative { -value } else { value });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

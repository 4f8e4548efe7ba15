use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{parse_rational, rational_sqrt, Rational};
use crate::error::{Error, Result};

/// The field Q(sqrt D) for a fixed non-negative rational D.
#[derive(Debug)]
pub struct QuadField {
    d: Rational,
    /// `Some(r)` when D = r^2, in which case the field collapses to Q.
    root: Option<Rational>,
    sqrt_d_f64: f64,
}

impl QuadField {
    pub fn new(d: Rational) -> Result<Arc<Self>> {
        if d.is_negative() {
            return Err(Error::Domain(format!("discriminant {d} is negative")));
        }
        let root = rational_sqrt(&d);
        let sqrt_d_f64 = d.to_f64().unwrap_or(f64::NAN).sqrt();
        Ok(Arc::new(QuadField {
            d,
            root,
            sqrt_d_f64,
        }))
    }

    pub fn discriminant(&self) -> &Rational {
        &self.d
    }

    /// True when D is the square of a rational.
    pub fn is_degenerate(&self) -> bool {
        self.root.is_some()
    }
}

/// `a + b*sqrt(D)` with rational `a`, `b`.
///
/// Values carrying no field (`field == None`) are plain rationals and combine
/// with any field. Mixing two different discriminants is a usage error: the
/// `checked_*` methods report it, the operators panic.
#[derive(Clone, Debug)]
pub struct QuadraticNumber {
    a: Rational,
    b: Rational,
    field: Option<Arc<QuadField>>,
}

fn merge_fields(
    x: &Option<Arc<QuadField>>,
    y: &Option<Arc<QuadField>>,
) -> Result<Option<Arc<QuadField>>> {
    match (x, y) {
        (None, f) | (f, None) => Ok(f.clone()),
        (Some(f), Some(g)) => {
            if Arc::ptr_eq(f, g) || f.d == g.d {
                Ok(Some(f.clone()))
            } else {
                Err(Error::DiscriminantMismatch {
                    left: f.d.to_string(),
                    right: g.d.to_string(),
                })
            }
        }
    }
}

impl QuadraticNumber {
    pub fn new(a: Rational, b: Rational, field: &Arc<QuadField>) -> Self {
        Self::normalized(a, b, Some(field.clone()))
    }

    pub fn from_rational(a: Rational) -> Self {
        QuadraticNumber {
            a,
            b: Rational::zero(),
            field: None,
        }
    }

    /// The rational `a` viewed as an element of `field`.
    pub fn rational_in(a: Rational, field: &Arc<QuadField>) -> Self {
        Self::new(a, Rational::zero(), field)
    }

    pub fn sqrt_d(field: &Arc<QuadField>) -> Self {
        Self::new(Rational::zero(), Rational::one(), field)
    }

    fn normalized(mut a: Rational, mut b: Rational, field: Option<Arc<QuadField>>) -> Self {
        match &field {
            Some(f) => {
                if let Some(r) = &f.root {
                    a += &b * r;
                    b = Rational::zero();
                }
            }
            None => debug_assert!(b.is_zero()),
        }
        QuadraticNumber { a, b, field }
    }

    pub fn rational_part(&self) -> &Rational {
        &self.a
    }

    pub fn radical_part(&self) -> &Rational {
        &self.b
    }

    pub fn field(&self) -> Option<&Arc<QuadField>> {
        self.field.as_ref()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Re-homes a value into `field`. Fails if it already lives in a different one.
    pub fn embed(&self, field: &Arc<QuadField>) -> Result<Self> {
        let merged = merge_fields(&self.field, &Some(field.clone()))?;
        Ok(Self::normalized(self.a.clone(), self.b.clone(), merged))
    }

    pub fn conjugate(&self) -> Self {
        QuadraticNumber {
            a: self.a.clone(),
            b: -&self.b,
            field: self.field.clone(),
        }
    }

    /// `a^2 - b^2 D`, the product with the conjugate.
    pub fn norm(&self) -> Rational {
        match &self.field {
            Some(f) => &self.a * &self.a - &self.b * &self.b * &f.d,
            None => &self.a * &self.a,
        }
    }

    /// Sign of `a + b sqrt(D)` decided by rational comparisons alone.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&Rational::zero());
        let sb = self.b.cmp(&Rational::zero());
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // Opposite signs: the larger of a^2 and b^2 D wins.
        let d = &self.field.as_ref().expect("irrational value without field").d;
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * d;
        match a2.cmp(&b2d) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        let field = merge_fields(&self.field, &rhs.field)?;
        Ok(Self::normalized(&self.a + &rhs.a, &self.b + &rhs.b, field))
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self> {
        let field = merge_fields(&self.field, &rhs.field)?;
        Ok(Self::normalized(&self.a - &rhs.a, &self.b - &rhs.b, field))
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        let field = merge_fields(&self.field, &rhs.field)?;
        let bb = &self.b * &rhs.b;
        let a = match &field {
            Some(f) if !bb.is_zero() => &self.a * &rhs.a + bb * &f.d,
            _ => &self.a * &rhs.a,
        };
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        Ok(Self::normalized(a, b, field))
    }

    pub fn checked_inv(&self) -> Result<Self> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::normalized(
            &self.a / &n,
            -&self.b / &n,
            self.field.clone(),
        ))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        merge_fields(&self.field, &rhs.field)?;
        self.checked_mul(&rhs.checked_inv()?)
    }
}

/// Non-negative square root inside Q(sqrt D), if one exists.
///
/// Solves `c^2 + d^2 D = a`, `2cd = b`. Eliminating `d` gives
/// `c^2 = (a +- sqrt(a^2 - b^2 D)) / 2`; both candidates are tried.
pub fn quad_sqrt(v: &QuadraticNumber) -> Result<QuadraticNumber> {
    match v.signum() {
        Ordering::Less => return Err(Error::NegativeRadicand(v.to_string())),
        Ordering::Equal => return Ok(QuadraticNumber::normalized(Rational::zero(), Rational::zero(), v.field.clone())),
        Ordering::Greater => {}
    }
    let not_square = || Error::NotAPerfectSquare(v.to_string());
    let field = v.field.clone();
    if v.b.is_zero() {
        if let Some(c) = rational_sqrt(&v.a) {
            return Ok(QuadraticNumber::normalized(c, Rational::zero(), field));
        }
        let f = field.as_ref().ok_or_else(not_square)?;
        let d = rational_sqrt(&(&v.a / &f.d)).ok_or_else(not_square)?;
        return Ok(QuadraticNumber::normalized(Rational::zero(), d, field));
    }
    let norm_root = rational_sqrt(&v.norm()).ok_or_else(not_square)?;
    let two = Rational::from_integer(2.into());
    for c2 in [(&v.a + &norm_root) / &two, (&v.a - &norm_root) / &two] {
        let Some(c) = rational_sqrt(&c2) else { continue };
        if c.is_zero() {
            continue;
        }
        let d = &v.b / (&two * &c);
        let w = QuadraticNumber::normalized(c, d, field.clone());
        if w.checked_mul(&w)? == *v {
            return Ok(if w.signum() == Ordering::Less { -w } else { w });
        }
    }
    Err(not_square())
}

impl PartialEq for QuadraticNumber {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a
            && self.b == other.b
            && (self.b.is_zero() || merge_fields(&self.field, &other.field).is_ok())
    }
}

impl PartialOrd for QuadraticNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.checked_sub(other).ok().map(|d| d.signum())
    }
}

macro_rules! forward_op {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait for QuadraticNumber {
            type Output = QuadraticNumber;
            fn $method(self, rhs: QuadraticNumber) -> QuadraticNumber {
                self.$checked(&rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl<'a> $trait<&'a QuadraticNumber> for &'a QuadraticNumber {
            type Output = QuadraticNumber;
            fn $method(self, rhs: &'a QuadraticNumber) -> QuadraticNumber {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
    };
}

forward_op!(Add, add, checked_add);
forward_op!(Sub, sub, checked_sub);
forward_op!(Mul, mul, checked_mul);
forward_op!(Div, div, checked_div);

impl Neg for QuadraticNumber {
    type Output = QuadraticNumber;
    fn neg(self) -> QuadraticNumber {
        QuadraticNumber {
            a: -self.a,
            b: -self.b,
            field: self.field,
        }
    }
}

impl crate::scalar::Scalar for QuadraticNumber {
    const EXACT: bool = true;

    fn zero() -> Self {
        Self::from_rational(<Rational as Zero>::zero())
    }
    fn one() -> Self {
        Self::from_rational(<Rational as One>::one())
    }
    fn from_i64(n: i64) -> Self {
        Self::from_rational(Rational::from_integer(n.into()))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.a) && Zero::is_zero(&self.b)
    }
    fn magnitude(&self) -> f64 {
        crate::scalar::RealScalar::to_f64(self).abs()
    }
}

impl crate::scalar::RealScalar for QuadraticNumber {
    fn sqrt(&self) -> Result<Self> {
        quad_sqrt(self)
    }

    fn to_f64(&self) -> f64 {
        let a = ToPrimitive::to_f64(&self.a).unwrap_or(f64::NAN);
        let Some(f) = self.field.as_ref().filter(|_| !self.b.is_zero()) else {
            return a;
        };
        let bs = ToPrimitive::to_f64(&self.b).unwrap_or(f64::NAN) * f.sqrt_d_f64;
        if (a < 0.0) != (bs < 0.0) && a != 0.0 {
            // a + b sqrt(D) = norm / (a - b sqrt(D)), avoiding cancellation.
            ToPrimitive::to_f64(&self.norm()).unwrap_or(f64::NAN) / (a - bs)
        } else {
            a + bs
        }
    }
}

impl fmt::Display for QuadraticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.field {
            Some(field) if !self.b.is_zero() => {
                let sign = if self.b.is_negative() { '-' } else { '+' };
                let b = self.b.abs();
                if self.a.is_zero() {
                    let lead = if self.b.is_negative() { "-" } else { "" };
                    write!(f, "{lead}{b}*sqrt({})", field.d)
                } else {
                    write!(f, "{} {sign} {b}*sqrt({})", self.a, field.d)
                }
            }
            _ => write!(f, "{}", self.a),
        }
    }
}

impl FromStr for QuadraticNumber {
    type Err = Error;

    /// Accepts the `Display` forms: `p/q`, `a + b*sqrt(D)`, `a - b*sqrt(D)`,
    /// `b*sqrt(D)` and `sqrt(D)`.
    fn from_str(text: &str) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(open) = s.find("sqrt(") else {
            return Ok(Self::from_rational(parse_rational(&s)?));
        };
        let bad = || Error::Parse(format!("not a quadratic number: {text:?}"));
        let close = s[open..].find(')').ok_or_else(bad)? + open;
        if close + 1 != s.len() {
            return Err(bad());
        }
        let d = parse_rational(&s[open + 5..close])?;
        let prefix = s[..open].strip_suffix('*').unwrap_or(&s[..open]);
        // The split between a and b is the last sign that is not leading.
        let split = prefix
            .char_indices()
            .filter(|&(i, c)| i > 0 && (c == '+' || c == '-'))
            .map(|(i, _)| i)
            .last();
        let (a_str, b_str) = match split {
            Some(i) => (&prefix[..i], &prefix[i..]),
            None => ("", prefix),
        };
        let a = if a_str.is_empty() {
            Rational::zero()
        } else {
            parse_rational(a_str)?
        };
        let b = match b_str {
            "" | "+" => Rational::one(),
            "-" => -Rational::one(),
            other => parse_rational(other.strip_prefix('+').unwrap_or(other))?,
        };
        let field = QuadField::new(d)?;
        Ok(Self::new(a, b, &field))
    }
}

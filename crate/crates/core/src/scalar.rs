//! Scalar fields used as jet coefficients.
//!
//! Two implementations are provided: [`f64`] for fast numeric work and
//! [`Rational`] (arbitrary precision) for exact identities. Everything above
//! this module is generic over [`Scalar`].

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub use crate::rational::Rational;

/// Coefficient field for jets and symbols.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
{
    /// `true` when arithmetic is exact.
    const EXACT: bool;
    /// Short tag written into serialized documents.
    const MODE: &'static str;

    fn from_int(n: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;

    /// Square root, when it exists in the field. Exact scalars return `None`
    /// unless the argument is the square of a rational.
    fn sqrt_checked(&self) -> Option<Self>;

    /// Tolerant equality: exact comparison for exact scalars, relative
    /// tolerance `tol` (with a unit floor) otherwise.
    fn close_to(&self, other: &Self, tol: f64) -> bool;

    /// Fused `self += a * b`.
    fn add_mul(&mut self, a: &Self, b: &Self);

    /// Decimal/fraction text used by the serializers.
    fn to_text(&self) -> String;
    fn parse_text(text: &str) -> Option<Self>;

    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const MODE: &'static str = "float";

    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt_checked(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }
    fn close_to(&self, other: &Self, tol: f64) -> bool {
        let scale = self.abs().max(other.abs()).max(1.0);
        (self - other).abs() <= tol * scale
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self = a.mul_add(*b, *self);
    }
    fn to_text(&self) -> String {
        format!("{self:?}")
    }
    fn parse_text(text: &str) -> Option<Self> {
        let t = text.trim();
        if let Some((n, d)) = t.split_once('/') {
            return Some(n.trim().parse::<f64>().ok()? / d.trim().parse::<f64>().ok()?);
        }
        t.parse().ok()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const MODE: &'static str = "exact";

    fn from_int(n: i64) -> Self {
        Rational::from_integer(n)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(num, den)
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
    fn sqrt_checked(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = exact_isqrt(&self.numer())?;
        let d = exact_isqrt(&self.denom())?;
        Some(Rational::from_big(BigRational::new(n, d)))
    }
    fn close_to(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *self += a * b;
    }
    fn to_text(&self) -> String {
        self.to_string()
    }
    fn parse_text(text: &str) -> Option<Self> {
        parse_rational(text)
    }
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Parses `"p"`, `"p/q"` or a finite decimal such as `"-1.25e-3"` into an
/// exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::from_big(BigRational::new(n, d)));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let all: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Some(Rational::from_big(value))
}

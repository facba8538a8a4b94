//! Exact rational arithmetic and the small scalar abstraction shared by the
//! linear solvers, distributions and residual checks.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number.
pub type Rat = BigRational;

/// Integer constant as a rational.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `num/den` as a rational. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// `n!` as an exact integer.
pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `x!/(x-k)!`, the falling factorial; zero when `k > x`.
pub fn falling_factorial(x: u64, k: u64) -> BigInt {
    if k > x {
        return BigInt::zero();
    }
    ((x - k + 1)..=x).fold(BigInt::one(), |acc, j| acc * BigInt::from(j))
}

/// Integer power of a rational.
pub fn rat_pow(base: &Rat, exp: u64) -> Rat {
    let mut acc = Rat::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        e >>= 1;
        if e > 0 {
            b = &b * &b;
        }
    }
    acc
}

/// Exact `k`-th root of a nonnegative integer, if it is a perfect power.
fn exact_root(value: &BigUint, k: u32) -> Option<BigUint> {
    let root = value.nth_root(k);
    if num_traits::pow(root.clone(), k as usize) == *value {
        Some(root)
    } else {
        None
    }
}

/// `base^exponent` for a positive integer `base` and a rational exponent,
/// returned only when the result is rational.
pub fn int_pow_rational(base: u64, exponent: &Rat) -> Option<Rat> {
    let num = exponent.numer();
    let den = exponent.denom();
    let q: u32 = den.to_u32()?;
    let p_abs: u64 = num.abs().to_u64()?;
    let powered = num_traits::pow(BigUint::from(base), p_abs as usize);
    let root = exact_root(&powered, q)?;
    let value = Rat::from_integer(BigInt::from(root));
    if num.is_negative() {
        Some(value.recip())
    } else {
        Some(value)
    }
}

/// Parse `"3"`, `"-3/4"` or `"0.125"` into an exact rational.
pub fn parse_rat(text: &str) -> Option<Rat> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((n, d)) = text.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    if let Some((int_part, frac_part)) = text.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        if !int_digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{}{}", int_digits, frac_part);
        let mut n = BigInt::from_str(&digits).ok()?;
        if negative {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10), frac_part.len());
        return Some(Rat::new(n, d));
    }
    BigInt::from_str(text).ok().map(Rat::from_integer)
}

/// Render a rational as `"p/q"`, or `"p"` when integral.
pub fn format_rat(value: &Rat) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Always `p/q`, also for integers.
pub fn format_fraction(value: &Rat) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Nearest `f64` to a rational, robust to numerators and denominators far
/// outside the `f64` range.
pub fn rat_to_f64(value: &Rat) -> f64 {
    if let (Some(n), Some(d)) = (value.numer().to_f64(), value.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = value.numer().bits() as i64;
    let db = value.denom().bits() as i64;
    // Keep 64 significant bits of the quotient.
    let shift = 64 - (nb - db);
    let (num, den) = if shift >= 0 {
        (value.numer().clone() << shift as usize, value.denom().clone())
    } else {
        (value.numer().clone(), value.denom().clone() << (-shift) as usize)
    };
    let q = num.div_floor(&den).to_f64().unwrap_or(f64::NAN);
    let half = -shift / 2;
    q * (2f64).powi(half as i32) * (2f64).powi((-shift - half) as i32)
}

/// Serde adapters writing rationals as `"p/q"` strings.
pub mod serde_rat {
    use super::{format_fraction, parse_rat, Rat};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_fraction(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let text = String::deserialize(d)?;
        parse_rat(&text).ok_or_else(|| D::Error::custom(format!("bad rational `{text}`")))
    }

    pub mod vec {
        use super::super::{format_fraction, Rat};
        use serde::ser::SerializeSeq;
        use serde::Serializer;

        pub fn serialize<S: Serializer>(values: &[Rat], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(values.len()))?;
            for v in values {
                seq.serialize_element(&format_fraction(v))?;
            }
            seq.end()
        }
    }
}

/// Field operations needed by the solvers and distribution code; implemented
/// for exact rationals and for `f64`.
pub trait Scalar:
    Clone + fmt::Debug + PartialEq + PartialOrd + Zero + One + Send + Sync + 'static
{
    fn from_rat(value: &Rat) -> Self;
    fn to_f64(&self) -> f64;
    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn div_ref(&self, other: &Self) -> Self;
    fn abs(&self) -> Self;
    /// True when the value is an exact (or numerically negligible) zero.
    fn is_negligible(&self) -> bool;
    /// Larger is a better pivot.
    fn pivot_score(&self) -> f64;
    /// Whether arithmetic on this type is exact.
    const EXACT: bool;
}

impl Scalar for Rat {
    fn from_rat(value: &Rat) -> Self {
        value.clone()
    }
    fn to_f64(&self) -> f64 {
        rat_to_f64(self)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn div_ref(&self, other: &Self) -> Self {
        self / other
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
    fn pivot_score(&self) -> f64 {
        // Any nonzero pivot is exact; prefer small bit sizes to limit growth.
        if self.is_zero() {
            0.0
        } else {
            1.0 / (1.0 + (self.numer().bits() + self.denom().bits()) as f64)
        }
    }
    const EXACT: bool = true;
}

impl Scalar for f64 {
    fn from_rat(value: &Rat) -> Self {
        rat_to_f64(value)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn div_ref(&self, other: &Self) -> Self {
        self / other
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_negligible(&self) -> bool {
        f64::abs(*self) < 1e-300
    }
    fn pivot_score(&self) -> f64 {
        f64::abs(*self)
    }
    const EXACT: bool = false;
}

/// Numeric backend selector for solves that offer both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericMode {
    Rational,
    Float,
}

impl FromStr for NumericMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rational" | "exact" => Ok(NumericMode::Rational),
            "float" | "f64" => Ok(NumericMode::Float),
            other => Err(format!("unknown numeric mode `{other}` (expected rational|float)")),
        }
    }
}

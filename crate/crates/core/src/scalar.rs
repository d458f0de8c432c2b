//! Numeric backends.
//!
//! Every computation in the crate is generic over [`Scalar`], which is
//! implemented for `f64` (fast, tolerance-based comparisons) and for
//! [`Exact`] (arbitrary-precision rationals, comparisons are exact).

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Absolute tolerance used for every floating-point comparison.
pub const TOLERANCE: f64 = 1e-9;

/// Arbitrary-precision rational scalar.
pub type Exact = BigRational;

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    /// True when arithmetic and comparisons are exact.
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_f64(x: f64) -> Option<Self>;

    /// Parses a JSON-style decimal literal (`-12.5e-3`).
    fn parse_decimal(s: &str) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// Shortest faithful decimal rendering. Exact values whose denominator
    /// is not of the form 2^a 5^b are rendered with 30 significant digits.
    fn to_decimal_string(&self) -> String;

    /// `num/den` in lowest terms, for exact scalars only.
    fn to_fraction_string(&self) -> Option<String> {
        None
    }

    /// Equality up to `tol` for floats, exact equality otherwise.
    fn close_to(&self, other: &Self, tol: f64) -> bool;

    /// `self >= other - tol` for floats, exact `>=` otherwise.
    fn at_least(&self, other: &Self, tol: f64) -> bool;

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

    fn abs_value(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse::<f64>().ok().filter(|x| x.is_finite())
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_decimal_string(&self) -> String {
        let s = format!("{self}");
        if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
            s
        } else {
            format!("{s}.0")
        }
    }

    fn close_to(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }

    fn at_least(&self, other: &Self, tol: f64) -> bool {
        *self >= *other - tol
    }
}

impl Scalar for Exact {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(x: f64) -> Option<Self> {
        // Round-trip through the shortest decimal so that 0.1 becomes 1/10
        // rather than its binary approximation.
        if !x.is_finite() {
            return None;
        }
        Self::parse_decimal(&format!("{x:e}"))
    }

    fn parse_decimal(s: &str) -> Option<Self> {
        parse_exact_decimal(s.trim())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            self.numer().to_f64().unwrap_or(f64::NAN) / self.denom().to_f64().unwrap_or(f64::NAN)
        })
    }

    fn to_decimal_string(&self) -> String {
        exact_to_decimal(self)
    }

    fn to_fraction_string(&self) -> Option<String> {
        Some(self.to_string())
    }

    fn close_to(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn at_least(&self, other: &Self, _tol: f64) -> bool {
        self >= other
    }
}

fn parse_exact_decimal(s: &str) -> Option<Exact> {
    if s.is_empty() {
        return None;
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = digits.parse().ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

fn exact_to_decimal(x: &Exact) -> String {
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let mut den = x.denom().clone();
    let mut twos = 0usize;
    let mut fives = 0usize;
    while den.is_multiple_of(&two) {
        den /= &two;
        twos += 1;
    }
    while den.is_multiple_of(&five) {
        den /= &five;
        fives += 1;
    }
    let sign = if x.is_negative() { "-" } else { "" };
    let abs = x.abs();
    if den.is_one() {
        let places = twos.max(fives);
        let scaled = (abs * BigRational::from_integer(num_traits::pow(BigInt::from(10u32), places)))
            .to_integer();
        let digits = scaled.to_string();
        if places == 0 {
            return format!("{sign}{digits}.0");
        }
        let digits = format!("{digits:0>width$}", width = places + 1);
        let (int_part, frac_part) = digits.split_at(digits.len() - places);
        format!("{sign}{int_part}.{frac_part}")
    } else {
        let places = 30usize;
        let scaled = (abs * BigRational::from_integer(num_traits::pow(BigInt::from(10u32), places)))
            .round()
            .to_integer();
        let digits = format!("{:0>width$}", scaled.to_string(), width = places + 1);
        let (int_part, frac_part) = digits.split_at(digits.len() - places);
        let frac_part = frac_part.trim_end_matches('0');
        let frac_part = if frac_part.is_empty() { "0" } else { frac_part };
        format!("{sign}{int_part}.{frac_part}")
    }
}

/// Sum of `weights[i] * values[i]`, accumulated left to right.
pub fn dot<S: Scalar>(weights: &[S], values: &[S]) -> S {
    weights
        .iter()
        .zip(values)
        .fold(S::zero(), |acc, (w, v)| acc + w.clone() * v.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parsing_is_exact() {
        let x = Exact::parse_decimal("0.1").unwrap();
        assert_eq!(x, Exact::from_ratio(1, 10));
        assert_eq!(Exact::parse_decimal("-2.5e1").unwrap(), Exact::from_ratio(-25, 1));
        assert_eq!(Exact::parse_decimal("3e-2").unwrap(), Exact::from_ratio(3, 100));
        assert_eq!(Exact::parse_decimal("7").unwrap(), Exact::from_ratio(7, 1));
        assert!(Exact::parse_decimal("abc").is_none());
        assert!(Exact::parse_decimal(".").is_none());
        assert!(Exact::parse_decimal("").is_none());
    }

    #[test]
    fn from_f64_uses_shortest_decimal() {
        assert_eq!(Exact::from_f64(0.3).unwrap(), Exact::from_ratio(3, 10));
        assert_eq!(Exact::from_f64(120.0).unwrap(), Exact::from_ratio(120, 1));
        assert!(Exact::from_f64(f64::NAN).is_none());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Exact::from_ratio(3, 10).to_decimal_string(), "0.3");
        assert_eq!(Exact::from_ratio(-1, 8).to_decimal_string(), "-0.125");
        assert_eq!(Exact::from_ratio(5, 1).to_decimal_string(), "5.0");
        assert_eq!(Exact::from_ratio(1, 3).to_decimal_string(), "0.333333333333333333333333333333");
        assert_eq!(2.0f64.to_decimal_string(), "2.0");
        assert_eq!(0.25f64.to_decimal_string(), "0.25");
    }

    #[test]
    fn comparisons() {
        assert!(1.0f64.close_to(&(1.0 + 1e-10), TOLERANCE));
        assert!(!1.0f64.close_to(&1.001, TOLERANCE));
        assert!(1.0f64.at_least(&(1.0 + 1e-10), TOLERANCE));
        let a = Exact::from_ratio(1, 3);
        assert!(a.close_to(&Exact::from_ratio(2, 6), 0.0));
        assert!(!a.close_to(&Exact::from_ratio(1, 4), 1.0));
        assert_eq!(dot(&[0.3, 0.7], &[10.0, 0.0]), 3.0);
    }
}

//! Real numbers that remember an exact rational value when they have one.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// A real number with an optional exact rational twin.
///
/// Arithmetic stays exact while both operands are exact. Values parsed from
/// decimal text (JSON numbers, `f64` literals) are exact decimals.
#[derive(Clone, Debug)]
pub struct Scalar {
    value: f64,
    exact: Option<BigRational>,
}

impl Scalar {
    pub fn from_exact(q: BigRational) -> Self {
        let value = q.to_f64().unwrap_or(f64::NAN);
        Self { value, exact: Some(q) }
    }

    /// Inexact float with no rational twin.
    pub fn float(value: f64) -> Self {
        Self { value, exact: None }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::from_exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn int(n: i64) -> Self {
        Self::ratio(n, 1)
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn is_zero(&self) -> bool {
        match &self.exact {
            Some(q) => q.is_zero(),
            None => self.value == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.exact {
            Some(q) => q.is_one(),
            None => self.value == 1.0,
        }
    }

    pub fn recip(&self) -> Self {
        match &self.exact {
            Some(q) if !q.is_zero() => Self::from_exact(q.recip()),
            _ => Self::float(1.0 / self.value),
        }
    }

    /// Hölder conjugate `x / (x - 1)`.
    pub fn conjugate(&self) -> Self {
        self / &(self - &Self::one())
    }

    /// Exact decimal value of the shortest round-trip rendering of `v`.
    pub fn decimal_of(v: f64) -> Option<BigRational> {
        if !v.is_finite() {
            return None;
        }
        parse_decimal(&format!("{v}"))
    }

    fn binary(&self, other: &Self, exact: impl Fn(&BigRational, &BigRational) -> Option<BigRational>, float: impl Fn(f64, f64) -> f64) -> Self {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => match exact(a, b) {
                Some(q) => Self::from_exact(q),
                None => Self::float(float(self.value, other.value)),
            },
            _ => Self::float(float(self.value, other.value)),
        }
    }
}

fn parse_decimal(text: &str) -> Option<BigRational> {
    let text = text.trim();
    let (mantissa, exp10) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(i) => (&digits[..i], &digits[i + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all = format!("{int_part}{frac_part}");
    let mut num: BigInt = all.parse().ok()?;
    if neg {
        num = -num;
    }
    let shift = exp10 - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let q = if shift >= 0 {
        BigRational::from_integer(num * num::pow(ten, shift as usize))
    } else {
        BigRational::new(num, num::pow(ten, (-shift) as usize))
    };
    Some(q)
}

fn parse_fraction(text: &str) -> Option<BigRational> {
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => parse_decimal(text),
    }
}

/// Renders an exact rational as `"n"` or `"n/d"`.
pub fn fraction_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Self {
            value: v,
            exact: Self::decimal_of(v),
        }
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Self::int(n)
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a == b,
            _ => self.value == other.value,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(q) => write!(f, "{}", fraction_string(q)),
            None => write!(f, "{}", self.value),
        }
    }
}

macro_rules! scalar_op {
    ($trait:ident, $method:ident, $exact:expr, $float:expr) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.binary(rhs, $exact, $float)
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

scalar_op!(Add, add, |a: &BigRational, b: &BigRational| Some(a + b), |a, b| a + b);
scalar_op!(Sub, sub, |a: &BigRational, b: &BigRational| Some(a - b), |a, b| a - b);
scalar_op!(Mul, mul, |a: &BigRational, b: &BigRational| Some(a * b), |a, b| a * b);
scalar_op!(
    Div,
    div,
    |a: &BigRational, b: &BigRational| if b.is_zero() { None } else { Some(a / b) },
    |a, b| a / b
);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match &self.exact {
            Some(q) => Scalar::from_exact(-q.clone()),
            None => Scalar::float(-self.value),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match &self.exact {
            Some(q) if Self::decimal_of(self.value).as_ref() != Some(q) => {
                serializer.serialize_str(&fraction_string(q))
            }
            _ => serializer.serialize_f64(self.value),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ScalarVisitor;

        impl Visitor<'_> for ScalarVisitor {
            type Value = Scalar;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a fraction string such as \"3/2\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Scalar, E> {
                Ok(Scalar::from(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scalar, E> {
                Ok(Scalar::int(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scalar, E> {
                Ok(Scalar::from_exact(BigRational::from_integer(BigInt::from(v))))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Scalar, E> {
                parse_fraction(v)
                    .map(Scalar::from_exact)
                    .ok_or_else(|| E::custom(format!("invalid fraction {v:?}")))
            }
        }

        deserializer.deserialize_any(ScalarVisitor)
    }
}

impl std::str::FromStr for Scalar {
    type Err = String;

    /// Accepts `n/d`, integers and decimals; all parse exactly.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        parse_fraction(text)
            .map(Scalar::from_exact)
            .ok_or_else(|| format!("invalid number {text:?}"))
    }
}

impl Scalar {
    /// Exact rational rendering if available, else the float in decimal.
    pub fn fraction_text(&self) -> String {
        self.to_string()
    }

    pub fn abs(&self) -> Self {
        match &self.exact {
            Some(q) => Self::from_exact(q.abs()),
            None => Self::float(self.value.abs()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals_are_exact() {
        let a = Scalar::from(0.1);
        let b = Scalar::from(0.2);
        assert_eq!(&a + &b, Scalar::from(0.3));
        assert_eq!((&a + &b).value(), 0.3);
    }

    #[test]
    fn conjugate_exact() {
        let p = Scalar::ratio(3, 2);
        assert_eq!(p.conjugate(), Scalar::int(3));
        assert_eq!(Scalar::int(2).conjugate(), Scalar::int(2));
    }

    #[test]
    fn inexact_contaminates() {
        let x = Scalar::float(std::f64::consts::PI) * Scalar::int(2);
        assert!(!x.is_exact());
        assert_eq!(x.value(), 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn json_round_trip() {
        for s in [Scalar::ratio(1, 3), Scalar::from(1.2), Scalar::float(0.1 + 0.2), Scalar::int(-7), Scalar::from(1e-300)] {
            let text = serde_json::to_string(&s).unwrap();
            let back: Scalar = serde_json::from_str(&text).unwrap();
            assert_eq!(back.value().to_bits(), s.value().to_bits(), "{text}");
            assert_eq!(back, s);
        }
        let third: Scalar = serde_json::from_str("\"1/3\"").unwrap();
        assert_eq!(third, Scalar::ratio(1, 3));
    }

    #[test]
    fn float_conversion_of_decimals_round_trips() {
        for v in [0.1, 1.2, -0.2, 2.5e-7, 123456.789, 1e22] {
            let q = Scalar::decimal_of(v).unwrap();
            assert_eq!(q.to_f64().unwrap().to_bits(), f64::to_bits(v), "{v}");
        }
    }
}

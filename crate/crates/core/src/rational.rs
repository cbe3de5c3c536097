//! Exact rational scalars and their canonical string form.
//!
//! Every scalar in the crate is a [`Rational`], i.e. a `BigRational` kept in
//! lowest terms with a positive denominator. The textual form is `"p"` or
//! `"p/q"` with an optional leading `-`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

fn is_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// Parses `"p"` or `"p/q"`; `field` names the location for error messages.
pub fn parse_rational_field(text: &str, field: &str) -> Result<Rational> {
    let body = text.strip_prefix('-').unwrap_or(text);
    let negative = body.len() != text.len();
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    if !is_digits(num) || den.is_some_and(|d| !is_digits(d)) {
        return Err(Error::parse(
            field,
            format!("invalid rational {text:?}, expected \"p\" or \"p/q\""),
        ));
    }
    let mut numer: BigInt = num.parse().expect("validated digits");
    if negative {
        numer = -numer;
    }
    let denom: BigInt = match den {
        Some(d) => d.parse().expect("validated digits"),
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(Error::parse(field, format!("zero denominator in {text:?}")));
    }
    Ok(Rational::new(numer, denom))
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    parse_rational_field(text, "rational")
}

/// Lowest-terms `"p/q"`, or `"p"` for integers.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

/// Serde adapter storing a [`Rational`] as its canonical string.
pub mod serde_str {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reduces() {
        assert_eq!(parse_rational("2/4").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("-6/3").unwrap(), int(-2));
        assert_eq!(parse_rational("0").unwrap(), zero());
        assert_eq!(parse_rational("-0/5").unwrap(), zero());
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "-", "1/", "/2", "1/0", "1.5", "+1", "1/-2", "a", "1 /2", "--1"] {
            assert!(parse_rational(bad).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn error_names_field() {
        let err = parse_rational_field("1/0", "atoms[0].weight").unwrap_err();
        assert!(err.to_string().starts_with("atoms[0].weight:"));
    }

    #[test]
    fn canonical_format() {
        assert_eq!(format_rational(&ratio(3, 6)), "1/2");
        assert_eq!(format_rational(&ratio(-4, 2)), "-2");
        assert_eq!(format_rational(&ratio(5, -15)), "-1/3");
    }
}

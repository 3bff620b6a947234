//! Parsing, formatting and serialization helpers for exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Parses `"a"` or `"a/b"` into a reduced fraction.
pub fn parse(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// `"num/den"`, or just `"num"` for integers.
pub fn format(u: &BigRational) -> String {
    u.to_string()
}

/// Natural log of `|u|`, accurate to f64 precision even when numerator or
/// denominator overflow f64. Returns `-inf` for zero.
pub fn ln_abs(u: &BigRational) -> f64 {
    if u.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_abs_int(u.numer()) - ln_abs_int(u.denom())
}

pub(crate) fn ln_abs_int(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n.abs() >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Serde adapter writing a rational as a `"num/den"` string.
pub mod serde_str {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(u: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(u))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for a list of rationals as `"num/den"` strings.
pub mod serde_vec {
    use num_rational::BigRational;
    use serde::ser::SerializeSeq;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for u in v {
            seq.serialize_element(&super::format(u))?;
        }
        seq.end()
    }
}

/// Serde adapter writing a big integer as a decimal string.
pub mod serde_bigint {
    use num_bigint::BigInt;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(n: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(format(&parse("-2/6").unwrap()), "-1/3");
        assert_eq!(format(&parse(" 12 ").unwrap()), "12");
        assert_eq!(format(&parse("4/-2").unwrap()), "-2");
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
    }

    #[test]
    fn ln_of_huge_values() {
        let big = BigRational::from_integer(BigInt::from(3).pow(2000));
        let expected = 2000.0 * 3f64.ln();
        assert!((ln_abs(&big) - expected).abs() / expected < 1e-12);
        assert_eq!(ln_abs(&BigRational::zero()), f64::NEG_INFINITY);
    }
}

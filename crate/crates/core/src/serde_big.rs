//! Serde helpers: big integers travel as decimal strings, rationals as
//! `{"num": "...", "den": "..."}` with both parts as decimal strings.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub mod biguint {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        d.deserialize_any(BigUintVisitor)
    }
}

struct BigUintVisitor;

impl<'de> Visitor<'de> for BigUintVisitor {
    type Value = BigUint;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a non-negative integer or a decimal string")
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<BigUint, E> {
        Ok(BigUint::from(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<BigUint, E> {
        u64::try_from(v)
            .map(BigUint::from)
            .map_err(|_| E::custom("negative integer"))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<BigUint, E> {
        parse_decimal_unsigned(v).ok_or_else(|| E::custom(format!("bad decimal integer {v:?}")))
    }
}

fn parse_decimal_unsigned(v: &str) -> Option<BigUint> {
    if v.is_empty() || !v.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigUint::parse_bytes(v.as_bytes(), 10)
}

fn parse_decimal_signed(v: &str) -> Option<BigInt> {
    let digits = v.strip_prefix('-').unwrap_or(v);
    let magnitude = parse_decimal_unsigned(digits)?;
    Some(if v.starts_with('-') {
        -BigInt::from(magnitude)
    } else {
        BigInt::from(magnitude)
    })
}

pub mod rational {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Wire {
        num: String,
        den: String,
    }

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        Wire {
            num: v.numer().to_str_radix(10),
            den: v.denom().to_str_radix(10),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let w = Wire::deserialize(d)?;
        let num =
            parse_decimal_signed(&w.num).ok_or_else(|| de::Error::custom(format!("bad numerator {:?}", w.num)))?;
        let den =
            parse_decimal_signed(&w.den).ok_or_else(|| de::Error::custom(format!("bad denominator {:?}", w.den)))?;
        if den.is_zero() || den.is_negative() {
            return Err(de::Error::custom("denominator must be positive"));
        }
        let r = BigRational::new(num.clone(), den.clone());
        // Only reduced fractions are canonical.
        if r.numer() != &num || r.denom() != &den {
            return Err(de::Error::custom("rational is not in lowest terms"));
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Holder {
        #[serde(with = "biguint")]
        big: BigUint,
        #[serde(with = "rational")]
        r: BigRational,
    }

    #[test]
    fn strings_and_numbers_both_parse() {
        let h: Holder = serde_json::from_str(r#"{"big": 12, "r": {"num": "-3", "den": "4"}}"#).unwrap();
        assert_eq!(h.big, BigUint::from(12u32));
        let again: Holder = serde_json::from_str(&serde_json::to_string(&h).unwrap()).unwrap();
        assert_eq!(h, again);
    }

    #[test]
    fn rejects_unreduced_and_junk() {
        assert!(serde_json::from_str::<Holder>(r#"{"big": "1", "r": {"num": "2", "den": "4"}}"#).is_err());
        assert!(serde_json::from_str::<Holder>(r#"{"big": "1x", "r": {"num": "1", "den": "4"}}"#).is_err());
        assert!(serde_json::from_str::<Holder>(r#"{"big": "1", "r": {"num": "1", "den": "0"}}"#).is_err());
        assert!(serde_json::from_str::<Holder>(r#"{"big": "+1", "r": {"num": "1", "den": "3"}}"#).is_err());
    }
}

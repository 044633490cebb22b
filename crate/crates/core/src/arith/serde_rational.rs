//! Serde adapters that write rationals as exact "num/den" strings.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{format_rational, parse_rational, Rational};

pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(x))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
    let s = String::deserialize(d)?;
    parse_rational(&s).map_err(D::Error::custom)
}

pub fn to_strings(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(format_rational).collect()
}

pub fn from_strings<E: serde::de::Error>(xs: &[String]) -> Result<Vec<Rational>, E> {
    xs.iter()
        .map(|s| parse_rational(s).map_err(E::custom))
        .collect()
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        to_strings(xs).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        from_strings(&v)
    }
}

pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
        m.iter()
            .map(|r| to_strings(r))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
        let v = Vec::<Vec<String>>::deserialize(d)?;
        v.iter().map(|r| from_strings(r)).collect()
    }
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        x.as_ref().map(format_rational).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        match Option::<String>::deserialize(d)? {
            Some(s) => parse_rational(&s).map(Some).map_err(D::Error::custom),
            None => Ok(None),
        }
    }
}

pub mod option_vec {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<Vec<Rational>>, s: S) -> Result<S::Ok, S::Error> {
        x.as_ref().map(|v| to_strings(v)).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Rational>>, D::Error> {
        match Option::<Vec<String>>::deserialize(d)? {
            Some(v) => from_strings(&v).map(Some),
            None => Ok(None),
        }
    }
}

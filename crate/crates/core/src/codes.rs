//! Compact country and sector codes.
//!
//! Codes are short ASCII strings (ISO-3166 alpha-2 countries, NACE rev.2
//! divisions such as `C29`). They are stored inline so that firm records stay
//! `Copy` and cheap to compare at tens of millions of rows.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

const CODE_CAP: usize = 8;

/// Literal used for the rest-of-world aggregate in input-output tables.
pub const ROW_MARKER: &str = "ROW";

/// EU-27 member states (ISO-3166 alpha-2, with `EL` accepted as Greece's Eurostat code).
pub const EU27: [&str; 28] = [
    "AT", "BE", "BG", "HR", "CY", "CZ", "DK", "EE", "FI", "FR", "DE", "GR", "EL", "HU", "IE", "IT",
    "LV", "LT", "LU", "MT", "NL", "PL", "PT", "RO", "SK", "SI", "ES", "SE",
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodeError {
    #[error("invalid country code {0:?}")]
    Country(String),
    #[error("invalid sector code {0:?}")]
    Sector(String),
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct InlineCode {
    bytes: [u8; CODE_CAP],
    len: u8,
}

impl InlineCode {
    fn new(s: &str) -> Option<Self> {
        if s.is_empty() || s.len() > CODE_CAP || !s.is_ascii() {
            return None;
        }
        let mut bytes = [0u8; CODE_CAP];
        bytes[..s.len()].copy_from_slice(s.as_bytes());
        Some(Self {
            bytes,
            len: s.len() as u8,
        })
    }

    fn as_str(&self) -> &str {
        // constructed from ASCII only
        std::str::from_utf8(&self.bytes[..self.len as usize]).unwrap()
    }
}

/// ISO-3166 alpha-2 country code, or the rest-of-world marker.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Country(InlineCode);

impl Country {
    pub fn as_str(&self) -> &str {
        self.0.as_str()
    }

    pub fn row() -> Self {
        Country(InlineCode::new(ROW_MARKER).unwrap())
    }

    pub fn is_row(&self) -> bool {
        self.as_str() == ROW_MARKER
    }
}

impl FromStr for Country {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let ok = s == ROW_MARKER || (s.len() == 2 && s.bytes().all(|b| b.is_ascii_uppercase()));
        if !ok {
            return Err(CodeError::Country(s.to_string()));
        }
        Ok(Country(InlineCode::new(s).unwrap()))
    }
}

/// NACE rev.2 division code: section letter followed by two digits (`A01`, `C29`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sector(InlineCode);

impl Sector {
    pub fn as_str(&self) -> &str {
        self.0.as_str()
    }
}

impl FromStr for Sector {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let b = s.as_bytes();
        let ok = b.len() == 3
            && b[0].is_ascii_uppercase()
            && b[1].is_ascii_digit()
            && b[2].is_ascii_digit();
        if !ok {
            return Err(CodeError::Sector(s.to_string()));
        }
        Ok(Sector(InlineCode::new(s).unwrap()))
    }
}

macro_rules! code_fmt {
    ($t:ty) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl fmt::Debug for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.as_str())
            }
        }

        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }
    };
}

code_fmt!(Country);
code_fmt!(Sector);

/// A (country, sector) cell; the unit of the input-output table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CountrySector {
    pub country: Country,
    pub sector: Sector,
}

impl CountrySector {
    pub fn new(country: Country, sector: Sector) -> Self {
        Self { country, sector }
    }
}

impl fmt::Display for CountrySector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.country, self.sector)
    }
}

/// Configured set of EU member states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EuList(std::collections::BTreeSet<Country>);

impl EuList {
    pub fn new<I: IntoIterator<Item = Country>>(countries: I) -> Self {
        Self(countries.into_iter().collect())
    }

    pub fn contains(&self, c: &Country) -> bool {
        self.0.contains(c)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Country> {
        self.0.iter()
    }
}

impl Default for EuList {
    fn default() -> Self {
        Self::new(EU27.iter().map(|c| c.parse().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_codes() {
        let c: Country = "AT".parse().unwrap();
        assert_eq!(c.as_str(), "AT");
        assert!(Country::row().is_row());
        assert!("at".parse::<Country>().is_err());
        assert!("AUT".parse::<Country>().is_err());
        let s: Sector = "C29".parse().unwrap();
        assert_eq!(s.to_string(), "C29");
        assert!("29".parse::<Sector>().is_err());
        assert!("C2".parse::<Sector>().is_err());
        assert!("A01".parse::<Sector>().is_ok());
    }

    #[test]
    fn ordering_is_lexicographic() {
        let a: Country = "AT".parse().unwrap();
        let b: Country = "BE".parse().unwrap();
        assert!(a < b);
    }

    #[test]
    fn default_eu_list() {
        let eu = EuList::default();
        assert!(eu.contains(&"DE".parse().unwrap()));
        assert!(!eu.contains(&"CN".parse().unwrap()));
        assert!(!eu.contains(&Country::row()));
    }
}

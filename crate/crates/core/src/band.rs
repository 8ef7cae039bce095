//! Employee size bands.
//!
//! Bands are half-open integer ranges `[lower, upper)`. The six standard
//! bands partition `[0, ∞)`; their textual labels follow the structural
//! business statistics convention (`0-9`, `10-19`, ..., `250+`).

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BandError {
    #[error("unknown size band label {0:?}")]
    UnknownLabel(String),
    #[error("empty size band [{lower}, {upper})")]
    Empty { lower: u32, upper: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SizeBand {
    lower: u32,
    upper: Option<u32>,
}

/// The standard partition of employee counts.
pub const STANDARD_BANDS: [SizeBand; 6] = [
    SizeBand { lower: 0, upper: Some(10) },
    SizeBand { lower: 10, upper: Some(20) },
    SizeBand { lower: 20, upper: Some(50) },
    SizeBand { lower: 50, upper: Some(150) },
    SizeBand { lower: 150, upper: Some(250) },
    SizeBand { lower: 250, upper: None },
];

impl SizeBand {
    pub fn new(lower: u32, upper: Option<u32>) -> Result<Self, BandError> {
        if let Some(u) = upper {
            if u <= lower {
                return Err(BandError::Empty { lower, upper: u });
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> u32 {
        self.lower
    }

    /// Exclusive upper bound, `None` for the open top band.
    pub fn upper(&self) -> Option<u32> {
        self.upper
    }

    pub fn is_unbounded(&self) -> bool {
        self.upper.is_none()
    }

    pub fn contains_value(&self, x: f64) -> bool {
        x >= self.lower as f64 && self.upper.is_none_or(|u| x < u as f64)
    }

    pub fn contains(&self, employees: u32) -> bool {
        employees >= self.lower && self.upper.is_none_or(|u| employees < u)
    }

    /// Imputation default for a missing average: arithmetic midpoint, or
    /// `1.5 × lower` for the open top band.
    pub fn default_average(&self) -> f64 {
        match self.upper {
            Some(u) => (self.lower as f64 + u as f64) / 2.0,
            None => self.lower as f64 * 1.5,
        }
    }

    /// Smallest and largest integer employee counts a sampled firm may take.
    /// Firms always have at least one employee.
    pub fn integer_range(&self) -> (u32, u32) {
        let lo = self.lower.max(1);
        let hi = self.upper.map(|u| u - 1).unwrap_or(u32::MAX).max(lo);
        (lo, hi)
    }

    pub fn label(&self) -> String {
        match self.upper {
            Some(u) => format!("{}-{}", self.lower, u - 1),
            None => format!("{}+", self.lower),
        }
    }
}

impl fmt::Display for SizeBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Serialize for SizeBand {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl FromStr for SizeBand {
    type Err = BandError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        STANDARD_BANDS
            .iter()
            .copied()
            .find(|b| b.label() == t)
            .ok_or_else(|| BandError::UnknownLabel(t.to_string()))
    }
}

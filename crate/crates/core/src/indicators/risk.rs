use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::IndicatorError;
use crate::ingest::ViolationList;
use crate::netgen::SupplyNetwork;
use crate::sampler::FirmList;

/// Per-node potential-violator flags. Only rest-of-world dummies can be set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViolatorVector {
    v: Vec<bool>,
}

impl ViolatorVector {
    pub fn from_flags(v: Vec<bool>) -> Self {
        Self { v }
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.v
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn count(&self) -> usize {
        self.v.iter().filter(|&&b| b).count()
    }
}

/// Flags every dummy whose (origin, sector) cell is listed.
pub fn mark_violators(firms: &FirmList, viol: &ViolationList) -> Result<ViolatorVector, IndicatorError> {
    let mut v = Vec::with_capacity(firms.len());
    for f in firms.iter() {
        if !f.is_row_dummy {
            v.push(false);
            continue;
        }
        let origin = f.country.ok_or(IndicatorError::UnassignedOrigin(f.id))?;
        v.push(viol.contains(origin, f.sector));
    }
    Ok(ViolatorVector { v })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    /// A supply walk of exactly `k` steps reaches a violator.
    Exact,
    /// Some walk of `1..=k` steps reaches a violator.
    Cumulative,
}

impl Semantics {
    pub fn label(&self) -> &'static str {
        match self {
            Semantics::Exact => "exact",
            Semantics::Cumulative => "cumulative",
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Semantics {
    type Err = IndicatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Semantics::Exact),
            "cumulative" => Ok(Semantics::Cumulative),
            _ => Err(IndicatorError::UnknownSemantics(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TierRisk {
    pub semantics: Semantics,
    pub k: u32,
    pub flags: Vec<bool>,
}

impl TierRisk {
    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&b| b).count()
    }
}

/// One propagation step: a buyer is flagged if any of its suppliers is.
fn step(net: &SupplyNetwork, w: &[bool]) -> Vec<bool> {
    (0..net.n_nodes() as u32)
        .into_par_iter()
        .map(|i| net.suppliers(i).iter().any(|&j| w[j as usize]))
        .collect()
}

fn check_len(net: &SupplyNetwork, v: &ViolatorVector) -> Result<(), IndicatorError> {
    if net.n_nodes() != v.len() {
        return Err(IndicatorError::SizeMismatch {
            network: net.n_nodes(),
            nodes: v.len(),
        });
    }
    Ok(())
}

/// Tier-`k` risk under exact-walk semantics, `(A^k v)_i > 0` in Boolean form.
/// `k = 0` returns the violator flags themselves.
pub fn risk_exact(net: &SupplyNetwork, v: &ViolatorVector, k: u32) -> Result<TierRisk, IndicatorError> {
    Ok(risk_tiers(net, v, k, Semantics::Exact)?
        .pop()
        .unwrap_or_else(|| TierRisk {
            semantics: Semantics::Exact,
            k: 0,
            flags: v.v.clone(),
        }))
}

/// Tier-`k` risk under within-`k` semantics: OR of exact tiers `1..=k`.
pub fn risk_cumulative(net: &SupplyNetwork, v: &ViolatorVector, k: u32) -> Result<TierRisk, IndicatorError> {
    Ok(risk_tiers(net, v, k, Semantics::Cumulative)?
        .pop()
        .unwrap_or_else(|| TierRisk {
            semantics: Semantics::Cumulative,
            k: 0,
            flags: vec![false; v.len()],
        }))
}

/// All tiers `1..=max_k` in one pass of `max_k` propagation steps.
pub fn risk_tiers(
    net: &SupplyNetwork,
    v: &ViolatorVector,
    max_k: u32,
    semantics: Semantics,
) -> Result<Vec<TierRisk>, IndicatorError> {
    check_len(net, v)?;
    let mut out = Vec::with_capacity(max_k as usize);
    let mut w = v.v.clone();
    let mut acc = vec![false; w.len()];
    for k in 1..=max_k {
        w = step(net, &w);
        let flags = match semantics {
            Semantics::Exact => w.clone(),
            Semantics::Cumulative => {
                acc.par_iter_mut().zip(w.par_iter()).for_each(|(a, &b)| *a |= b);
                acc.clone()
            }
        };
        out.push(TierRisk { semantics, k, flags });
    }
    Ok(out)
}

//! Strictly increasing bi-infinite site families `(j_m)` with `j_0 = 0`,
//! materialized up to a finite horizon on each side.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::SiteIndex;

/// How a subsequence was generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsequenceRule {
    /// `j_m = step · m`.
    Arithmetic { step: i64 },
    /// `j_m = sign(m) |m|^exponent`.
    Power { exponent: u32 },
    /// `j_m = sign(m) base^|m|` for `m ≠ 0`, `j_0 = 0`.
    Geometric { base: i64 },
    /// Explicit list of sites.
    Explicit,
}

/// Materialized `(j_m)` for `-neg_horizon ≤ m ≤ pos_horizon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSubsequence {
    rule: SubsequenceRule,
    neg_horizon: usize,
    pos_horizon: usize,
    /// `values[i] = j_{i - neg_horizon}`.
    values: Vec<SiteIndex>,
}

impl SparseSubsequence {
    pub fn arithmetic(step: i64, horizon: usize) -> Result<Self> {
        if step < 1 {
            return Err(Error::InvalidParameter(format!("arithmetic step must be ≥ 1, got {step}")));
        }
        let h = horizon as i64;
        let values = (-h..=h)
            .map(|m| step.checked_mul(m).ok_or_else(overflow))
            .collect::<Result<_>>()?;
        Ok(Self::from_parts(SubsequenceRule::Arithmetic { step }, horizon, horizon, values))
    }

    pub fn power(exponent: u32, horizon: usize) -> Result<Self> {
        if exponent < 1 {
            return Err(Error::InvalidParameter("power exponent must be ≥ 1".into()));
        }
        let h = horizon as i64;
        let values = (-h..=h)
            .map(|m| {
                m.unsigned_abs()
                    .checked_pow(exponent)
                    .and_then(|v| i64::try_from(v).ok())
                    .map(|v| m.signum() * v)
                    .ok_or_else(overflow)
            })
            .collect::<Result<_>>()?;
        Ok(Self::from_parts(SubsequenceRule::Power { exponent }, horizon, horizon, values))
    }

    pub fn geometric(base: i64, horizon: usize) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidParameter(format!("geometric base must be ≥ 2, got {base}")));
        }
        let h = horizon as i64;
        let values = (-h..=h)
            .map(|m| {
                if m == 0 {
                    return Ok(0);
                }
                base.checked_pow(m.unsigned_abs() as u32)
                    .map(|v| m.signum() * v)
                    .ok_or_else(overflow)
            })
            .collect::<Result<_>>()?;
        Ok(Self::from_parts(SubsequenceRule::Geometric { base }, horizon, horizon, values))
    }

    /// Sorted, strictly increasing sites that contain `0`; `0` becomes `j_0`.
    pub fn explicit(sites: &[SiteIndex]) -> Result<Self> {
        if sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("subsequence sites must be strictly increasing".into()));
        }
        let zero = sites
            .iter()
            .position(|&s| s == 0)
            .ok_or_else(|| Error::InvalidParameter("subsequence must contain j_0 = 0".into()))?;
        let neg = zero;
        let pos = sites.len() - zero - 1;
        Ok(Self::from_parts(SubsequenceRule::Explicit, neg, pos, sites.to_vec()))
    }

    fn from_parts(rule: SubsequenceRule, neg: usize, pos: usize, values: Vec<SiteIndex>) -> Self {
        debug_assert_eq!(values.len(), neg + pos + 1);
        SparseSubsequence {
            rule,
            neg_horizon: neg,
            pos_horizon: pos,
            values,
        }
    }

    pub fn rule(&self) -> SubsequenceRule {
        self.rule
    }

    /// Symmetric horizon `min(neg, pos)`.
    pub fn horizon(&self) -> usize {
        self.neg_horizon.min(self.pos_horizon)
    }

    pub fn neg_horizon(&self) -> usize {
        self.neg_horizon
    }

    pub fn pos_horizon(&self) -> usize {
        self.pos_horizon
    }

    /// Restricts to `|m| ≤ horizon` on both sides.
    pub fn truncated(&self, horizon: usize) -> Self {
        let neg = self.neg_horizon.min(horizon);
        let pos = self.pos_horizon.min(horizon);
        let start = self.neg_horizon - neg;
        SparseSubsequence {
            rule: self.rule,
            neg_horizon: neg,
            pos_horizon: pos,
            values: self.values[start..start + neg + pos + 1].to_vec(),
        }
    }

    pub fn try_j(&self, m: i64) -> Option<SiteIndex> {
        if m < -(self.neg_horizon as i64) || m > self.pos_horizon as i64 {
            return None;
        }
        Some(self.values[(m + self.neg_horizon as i64) as usize])
    }

    /// `j_m`; panics outside the materialized range.
    pub fn j(&self, m: i64) -> SiteIndex {
        self.try_j(m)
            .unwrap_or_else(|| panic!("j_{m} outside materialized range"))
    }

    /// Gap `g_m`: `j_{m+1} − j_m` for `m ≥ 0`, `j_m − j_{m−1}` for `m < 0`.
    pub fn gap(&self, m: i64) -> Option<i64> {
        if m >= 0 {
            Some(self.try_j(m + 1)? - self.try_j(m)?)
        } else {
            Some(self.try_j(m)? - self.try_j(m - 1)?)
        }
    }

    /// `d_m = dim ℋ_m = 2 (j_{m+1} − j_m)`.
    pub fn block_dim(&self, m: i64) -> Option<usize> {
        Some(2 * (self.try_j(m + 1)? - self.try_j(m)?) as usize)
    }

    /// Materialized `(m, j_m)` pairs in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, SiteIndex)> + '_ {
        let neg = self.neg_horizon as i64;
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &j)| (i as i64 - neg, j))
    }

    pub fn sites(&self) -> &[SiteIndex] {
        &self.values
    }

    /// `m` with `j_m = site`, if the site belongs to the family.
    pub fn index_of(&self, site: SiteIndex) -> Option<i64> {
        self.values
            .binary_search(&site)
            .ok()
            .map(|i| i as i64 - self.neg_horizon as i64)
    }

    /// Cavity index `m` with `2 j_m ≤ n ≤ 2 j_{m+1} − 1`, if both ends are
    /// materialized.
    pub fn block_of_cmv(&self, n: i64) -> Option<i64> {
        // Largest m with 2 j_m ≤ n.
        let idx = self.values.partition_point(|&j| 2 * j <= n);
        if idx == 0 || idx >= self.values.len() {
            return None;
        }
        Some(idx as i64 - 1 - self.neg_horizon as i64)
    }

    /// Relative-gap statistic known in closed form from the generator.
    pub fn structural_q(&self) -> Option<f64> {
        match self.rule {
            SubsequenceRule::Arithmetic { .. } | SubsequenceRule::Power { .. } => Some(0.0),
            SubsequenceRule::Geometric { base } => Some((base - 1) as f64),
            SubsequenceRule::Explicit => None,
        }
    }
}

fn overflow() -> Error {
    Error::InvalidParameter("subsequence site overflows i64 at the requested horizon".into())
}

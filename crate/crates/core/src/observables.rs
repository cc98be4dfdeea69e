//! Position distributions, moments, finite-time velocity proxies and
//! Chebyshev tails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{SiteIndex, Spin, WalkState};
use crate::walk::{Evolver, SplitStepWalk};

/// Relative slack allowed when checking the Chebyshev inequality in floating
/// point.
pub const CHEBYSHEV_REL_TOL: f64 = 4.0 * f64::EPSILON;

/// `p_{ψ,t}(j)` over a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionDistribution {
    pub t: usize,
    pub lo: SiteIndex,
    pub mass: Vec<f64>,
}

impl PositionDistribution {
    pub fn from_state(state: &WalkState, t: usize) -> Self {
        PositionDistribution {
            t,
            lo: state.lo(),
            mass: state.site_masses().map(|(_, p)| p).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (SiteIndex, f64)> + '_ {
        self.mass.iter().enumerate().map(move |(i, &p)| (self.lo + i as i64, p))
    }

    pub fn get(&self, j: SiteIndex) -> f64 {
        if j < self.lo {
            return 0.0;
        }
        self.mass.get((j - self.lo) as usize).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// `Σ j² p(j)`.
    pub fn second_moment(&self) -> f64 {
        self.iter().map(|(j, p)| (j as f64) * (j as f64) * p).sum()
    }

    /// `P(|𝒥| ≥ v t)`.
    pub fn tail_probability(&self, v: f64) -> Result<f64> {
        if !(v > 0.0) {
            return Err(Error::InvalidArgument(format!("tail velocity must be > 0, got {v}")));
        }
        let r = v * self.t as f64;
        Ok(self
            .iter()
            .filter(|&(j, _)| (j.unsigned_abs() as f64) >= r)
            .map(|(_, p)| p)
            .sum())
    }

    /// `E[(𝒥/t)²] / v²`; infinite at `t = 0`.
    pub fn chebyshev_bound(&self, v: f64) -> f64 {
        let r = v * self.t as f64;
        if r == 0.0 {
            return f64::INFINITY;
        }
        self.second_moment() / (r * r)
    }

    /// Checks `tail ≤ second_moment / (v t)²` up to rounding.
    pub fn chebyshev_holds(&self, v: f64) -> Result<bool> {
        let tail = self.tail_probability(v)?;
        Ok(tail <= self.chebyshev_bound(v) * (1.0 + CHEBYSHEV_REL_TOL))
    }

    /// Writes `t, j, p` rows for nonzero masses.
    pub fn write_csv_rows<W: Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        for (j, p) in self.iter().filter(|&(_, p)| p > 0.0) {
            w.serialize(DistributionRow { t: self.t, j, p })?;
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct DistributionRow {
    t: usize,
    j: i64,
    p: f64,
}

/// `p_{ψ,t}` for `ψ` evolved `t` steps.
pub fn distribution(walk: &SplitStepWalk, psi: &WalkState, t: usize) -> PositionDistribution {
    let state = crate::walk::evolve(walk, psi, t).state;
    PositionDistribution::from_state(&state, t)
}

/// `‖Q ψ‖ / t`.
pub fn vhat(state: &WalkState, t: usize) -> f64 {
    if t == 0 {
        return 0.0;
    }
    state.position_norm_sqr().sqrt() / t as f64
}

/// Member of an initial-state family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum StateSpec {
    /// `δ_site^±`.
    Delta { site: SiteIndex, spin: SpinName },
    /// `(δ_site⁺ + i δ_site⁻)/√2`.
    Mixed { site: SiteIndex },
    /// `e^{iθj}` on `+` over `[center − width/2, center + width/2 − 1]`,
    /// normalized.
    Packet { theta: f64, width: usize, center: SiteIndex },
    /// Explicit snapshot file.
    File { path: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinName {
    Plus,
    Minus,
}

impl From<SpinName> for Spin {
    fn from(s: SpinName) -> Spin {
        match s {
            SpinName::Plus => Spin::Plus,
            SpinName::Minus => Spin::Minus,
        }
    }
}

impl StateSpec {
    pub fn id(&self) -> String {
        match self {
            StateSpec::Delta { site, spin } => {
                let s = match spin {
                    SpinName::Plus => "plus",
                    SpinName::Minus => "minus",
                };
                format!("delta_{s}@{site}")
            }
            StateSpec::Mixed { site } => format!("mixed@{site}"),
            StateSpec::Packet { theta, width, center } => {
                format!("packet_theta={:.4}_w={width}@{center}", theta)
            }
            StateSpec::File { path } => format!("file:{path}"),
        }
    }

    pub fn build(&self) -> Result<WalkState> {
        match self {
            StateSpec::Delta { site, spin } => Ok(WalkState::basis(*site, (*spin).into())),
            StateSpec::Mixed { site } => {
                let mut s = WalkState::zero();
                s.set(*site, Spin::Plus, Complex64::new(FRAC_1_SQRT_2, 0.0));
                s.set(*site, Spin::Minus, Complex64::new(0.0, FRAC_1_SQRT_2));
                Ok(s)
            }
            StateSpec::Packet { theta, width, center } => {
                if *width == 0 {
                    return Err(Error::InvalidParameter("packet width must be ≥ 1".into()));
                }
                let lo = center - (*width as i64) / 2;
                let hi = lo + *width as i64 - 1;
                WalkState::from_fn(lo, hi, |j| {
                    (Complex64::from_polar(1.0, theta * j as f64), Complex64::new(0.0, 0.0))
                })
                .normalized()
            }
            StateSpec::File { path } => {
                let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
                WalkState::read_csv(f)?.normalized()
            }
        }
    }
}

/// Width of the default wave packets.
pub const PACKET_WIDTH: usize = 16;

/// Site-localized members: `δ_0⁺`, `δ_0⁻`, `(δ_0⁺ + iδ_0⁻)/√2`.
pub fn localized_family() -> Vec<StateSpec> {
    vec![
        StateSpec::Delta { site: 0, spin: SpinName::Plus },
        StateSpec::Delta { site: 0, spin: SpinName::Minus },
        StateSpec::Mixed { site: 0 },
    ]
}

/// Boosted packets `e^{iθj}` for `θ ∈ {0, π/4, π/2, 3π/4, π}`.
pub fn packet_family() -> Vec<StateSpec> {
    (0..5)
        .map(|i| StateSpec::Packet {
            theta: i as f64 * PI / 4.0,
            width: PACKET_WIDTH,
            center: 0,
        })
        .collect()
}

/// Localized states followed by boosted packets.
pub fn default_family() -> Vec<StateSpec> {
    let mut f = localized_family();
    f.extend(packet_family());
    f
}

/// One row of `velocity.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocitySample {
    pub t: usize,
    pub psi_id: String,
    pub vhat: f64,
    pub second_moment: f64,
    pub tail_p_at_v: f64,
}

/// Per-state summary over the tail of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateTail {
    pub psi_id: String,
    pub max_vhat_tail: f64,
    /// `v̂` does not increase along the tail of the grid.
    pub monotone_tail: bool,
    pub norm_drift: f64,
}

/// Finite-time proxy for the maximal velocity over a state family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityEstimate {
    pub samples: Vec<VelocitySample>,
    /// Max over the family and over `t ≥ tail_start`.
    pub proxy: f64,
    pub tail_start: usize,
    pub tail_v: f64,
    pub per_state: Vec<StateTail>,
    pub family: Vec<String>,
}

impl VelocityEstimate {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for s in &self.samples {
            w.serialize(s)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    /// Largest `v̂` over the whole grid and family.
    pub fn max_vhat(&self) -> f64 {
        self.samples.iter().map(|s| s.vhat).fold(0.0, f64::max)
    }

    /// Largest `v̂` at time `t` over the family.
    pub fn max_at(&self, t: usize) -> Option<f64> {
        self.samples
            .iter()
            .filter(|s| s.t == t)
            .map(|s| s.vhat)
            .reduce(f64::max)
    }
}

/// Start of the last quartile of a sorted grid.
pub fn tail_start_index(len: usize) -> usize {
    (3 * len) / 4
}

/// Evolves every family member along `t_grid` in parallel.
///
/// `t_grid` is sorted and deduplicated first; `tail_v` is the velocity at
/// which the Chebyshev tail is sampled.
pub fn velocity_proxy(
    walk: &SplitStepWalk,
    family: &[StateSpec],
    t_grid: &[usize],
    tail_v: f64,
) -> Result<VelocityEstimate> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("empty initial-state family".into()));
    }
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    let mut grid = t_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let tail_idx = tail_start_index(grid.len());
    let tail_start = grid[tail_idx];

    let states = family.iter().map(StateSpec::build).collect::<Result<Vec<_>>>()?;
    let per: Vec<(Vec<VelocitySample>, StateTail)> = family
        .par_iter()
        .zip(states.into_par_iter())
        .map(|(spec, psi)| -> Result<_> {
            let id = spec.id();
            let mut ev = Evolver::new(walk, psi);
            let mut rows = Vec::with_capacity(grid.len());
            for &t in &grid {
                ev.advance_to(t);
                let dist = PositionDistribution::from_state(ev.state(), t);
                let sm = dist.second_moment();
                rows.push(VelocitySample {
                    t,
                    psi_id: id.clone(),
                    vhat: if t == 0 { 0.0 } else { sm.sqrt() / t as f64 },
                    second_moment: sm,
                    tail_p_at_v: dist.tail_probability(tail_v)?,
                });
            }
            let tail = &rows[tail_idx..];
            let summary = StateTail {
                psi_id: id,
                max_vhat_tail: tail.iter().map(|r| r.vhat).fold(0.0, f64::max),
                monotone_tail: tail.windows(2).all(|w| w[1].vhat <= w[0].vhat),
                norm_drift: ev.norm_drift(),
            };
            Ok((rows, summary))
        })
        .collect::<Result<_>>()?;

    let proxy = per.iter().map(|(_, s)| s.max_vhat_tail).fold(0.0, f64::max);
    let (samples, per_state): (Vec<_>, Vec<_>) = per.into_iter().unzip();
    Ok(VelocityEstimate {
        samples: samples.into_iter().flatten().collect(),
        proxy,
        tail_start,
        tail_v,
        per_state,
        family: family.iter().map(StateSpec::id).collect(),
    })
}

/// `max_ψ v̂_ψ(t)` over a family at a single time.
pub fn max_vhat_at(walk: &SplitStepWalk, family: &[StateSpec], t: usize) -> Result<f64> {
    Ok(velocity_proxy(walk, family, &[t], 0.5)?.proxy)
}

/// Evenly spaced grid `step, 2·step, …, ≤ t_max`.
pub fn linear_grid(step: usize, t_max: usize) -> Vec<usize> {
    (1..=t_max / step.max(1)).map(|i| i * step.max(1)).collect()
}

//! States on `ℓ²(ℤ) ⊗ ℂ²` with compact support, the CMV re-indexing and the
//! position observable.
//!
//! Amplitudes are stored interleaved as `(ψ⁺(j), ψ⁻(j))` pairs over an
//! inclusive window of sites. Because the CMV identification sends
//! `δ_j⁺ ↦ δ_{2j−1}` and `δ_j⁻ ↦ δ_{2j}`, this layout is already the CMV
//! vector starting at index `2·lo − 1`; re-indexing never touches the values.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice site `j ∈ ℤ`.
pub type SiteIndex = i64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Internal (coin) degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Plus,
    Minus,
}

impl Spin {
    fn offset(self) -> usize {
        match self {
            Spin::Plus => 0,
            Spin::Minus => 1,
        }
    }
}

/// Index into `ℓ²(ℤ)` after the CMV identification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CmvIndex(pub i64);

impl CmvIndex {
    pub fn from_site(site: SiteIndex, spin: Spin) -> Self {
        match spin {
            Spin::Plus => CmvIndex(2 * site - 1),
            Spin::Minus => CmvIndex(2 * site),
        }
    }

    pub fn to_site(self) -> (SiteIndex, Spin) {
        if self.0.rem_euclid(2) == 0 {
            (self.0 / 2, Spin::Minus)
        } else {
            ((self.0 + 1) / 2, Spin::Plus)
        }
    }

    /// Lattice site carrying this index, i.e. `⌈n/2⌉`.
    pub fn site(self) -> SiteIndex {
        (self.0 + 1).div_euclid(2)
    }
}

/// Compactly supported state over an inclusive window of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    lo: SiteIndex,
    amps: Vec<Complex64>,
}

impl Default for WalkState {
    fn default() -> Self {
        Self::zero()
    }
}

impl WalkState {
    /// The zero vector (empty window).
    pub fn zero() -> Self {
        WalkState {
            lo: 0,
            amps: Vec::new(),
        }
    }

    /// Zero amplitudes over `[lo, hi]`.
    pub fn zeros(lo: SiteIndex, hi: SiteIndex) -> Self {
        assert!(hi >= lo, "empty window [{lo}, {hi}]");
        WalkState {
            lo,
            amps: vec![ZERO; 2 * (hi - lo + 1) as usize],
        }
    }

    /// `δ_j^±`.
    pub fn basis(site: SiteIndex, spin: Spin) -> Self {
        let mut s = Self::zeros(site, site);
        s.set(site, spin, Complex64::new(1.0, 0.0));
        s
    }

    /// Builds a state from `(ψ⁺(j), ψ⁻(j))` pairs starting at `lo`.
    pub fn from_pairs(lo: SiteIndex, pairs: &[(Complex64, Complex64)]) -> Self {
        let mut amps = Vec::with_capacity(2 * pairs.len());
        for &(p, m) in pairs {
            amps.push(p);
            amps.push(m);
        }
        WalkState { lo, amps }
    }

    /// Builds a state on `[lo, hi]` from a per-site function.
    pub fn from_fn(
        lo: SiteIndex,
        hi: SiteIndex,
        mut f: impl FnMut(SiteIndex) -> (Complex64, Complex64),
    ) -> Self {
        let pairs: Vec<_> = (lo..=hi).map(&mut f).collect();
        Self::from_pairs(lo, &pairs)
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn lo(&self) -> SiteIndex {
        self.lo
    }

    /// Last site of the window. For the empty state this is `lo - 1`.
    pub fn hi(&self) -> SiteIndex {
        self.lo + self.num_sites() as i64 - 1
    }

    pub fn num_sites(&self) -> usize {
        self.amps.len() / 2
    }

    /// Interleaved `(ψ⁺, ψ⁻)` amplitudes over the window.
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    fn slot(&self, site: SiteIndex, spin: Spin) -> Option<usize> {
        if site < self.lo || site > self.hi() {
            return None;
        }
        Some(2 * (site - self.lo) as usize + spin.offset())
    }

    /// Amplitude `⟨δ_j^± | ψ⟩`; zero outside the window.
    pub fn get(&self, site: SiteIndex, spin: Spin) -> Complex64 {
        self.slot(site, spin).map_or(ZERO, |i| self.amps[i])
    }

    /// Sets an amplitude, growing the window if needed.
    pub fn set(&mut self, site: SiteIndex, spin: Spin, value: Complex64) {
        if self.is_empty() {
            *self = Self::zeros(site, site);
        } else {
            self.extend_to(site.min(self.lo), site.max(self.hi()));
        }
        let i = self.slot(site, spin).unwrap();
        self.amps[i] = value;
    }

    /// Iterates `(j, ψ⁺(j), ψ⁻(j))` over the window.
    pub fn sites(&self) -> impl Iterator<Item = (SiteIndex, Complex64, Complex64)> + '_ {
        self.amps
            .chunks_exact(2)
            .enumerate()
            .map(move |(i, c)| (self.lo + i as i64, c[0], c[1]))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescales to unit norm.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument(
                "cannot normalize a zero or non-finite state".into(),
            ));
        }
        let inv = 1.0 / n;
        for z in &mut self.amps {
            *z *= inv;
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// Grows the window to cover `[lo, hi]` with zero padding.
    pub fn extend_to(&mut self, lo: SiteIndex, hi: SiteIndex) {
        if self.is_empty() {
            *self = Self::zeros(lo, hi);
            return;
        }
        let new_lo = lo.min(self.lo);
        let new_hi = hi.max(self.hi());
        if new_lo == self.lo && new_hi == self.hi() {
            return;
        }
        let front = 2 * (self.lo - new_lo) as usize;
        let back = 2 * (new_hi - self.hi()) as usize;
        let mut amps = Vec::with_capacity(front + self.amps.len() + back);
        amps.resize(front, ZERO);
        amps.extend_from_slice(&self.amps);
        amps.resize(amps.len() + back, ZERO);
        self.amps = amps;
        self.lo = new_lo;
    }

    /// Drops sites at either end whose amplitudes are exactly zero.
    pub fn trim_zeros(&mut self) {
        let n = self.num_sites();
        let is_zero = |i: usize| self.amps[2 * i] == ZERO && self.amps[2 * i + 1] == ZERO;
        let first = (0..n).find(|&i| !is_zero(i));
        let Some(first) = first else {
            *self = Self::zero();
            return;
        };
        let last = (0..n).rev().find(|&i| !is_zero(i)).unwrap();
        if first == 0 && last == n - 1 {
            return;
        }
        self.amps = self.amps[2 * first..2 * (last + 1)].to_vec();
        self.lo += first as i64;
    }

    /// Smallest window `[lo, hi]` outside which every amplitude is exactly zero.
    pub fn support(&self) -> Option<(SiteIndex, SiteIndex)> {
        let mut it = self
            .sites()
            .filter(|&(_, p, m)| p != ZERO || m != ZERO)
            .map(|(j, _, _)| j);
        let first = it.next()?;
        let last = it.last().unwrap_or(first);
        Some((first, last))
    }

    /// Per-site probability mass `|ψ⁺(j)|² + |ψ⁻(j)|²`.
    pub fn site_masses(&self) -> impl Iterator<Item = (SiteIndex, f64)> + '_ {
        self.sites()
            .map(|(j, p, m)| (j, p.norm_sqr() + m.norm_sqr()))
    }

    /// `Q ψ`, unnormalized.
    pub fn apply_position(&self) -> WalkState {
        let mut out = self.clone();
        for (i, pair) in out.amps.chunks_exact_mut(2).enumerate() {
            let j = (self.lo + i as i64) as f64;
            pair[0] *= j;
            pair[1] *= j;
        }
        out
    }

    /// `‖Q ψ‖²`, accumulated directly from the amplitudes.
    pub fn position_norm_sqr(&self) -> f64 {
        self.site_masses()
            .map(|(j, p)| (j as f64) * (j as f64) * p)
            .sum()
    }

    /// Inner product `⟨self | other⟩`.
    pub fn inner(&self, other: &WalkState) -> Complex64 {
        let lo = self.lo.max(other.lo);
        let hi = self.hi().min(other.hi());
        (lo..=hi)
            .map(|j| {
                self.get(j, Spin::Plus).conj() * other.get(j, Spin::Plus)
                    + self.get(j, Spin::Minus).conj() * other.get(j, Spin::Minus)
            })
            .sum()
    }

    /// Largest `|ψ(j,s) − φ(j,s)|` over the union of both windows.
    pub fn max_abs_diff(&self, other: &WalkState) -> f64 {
        if self.is_empty() && other.is_empty() {
            return 0.0;
        }
        let lo = if self.is_empty() {
            other.lo
        } else if other.is_empty() {
            self.lo
        } else {
            self.lo.min(other.lo)
        };
        let hi = self.hi().max(other.hi());
        let mut worst = 0.0f64;
        for j in lo..=hi {
            for s in [Spin::Plus, Spin::Minus] {
                worst = worst.max((self.get(j, s) - other.get(j, s)).norm());
            }
        }
        worst
    }

    /// Probability mass at sites outside `[lo, hi]`.
    pub fn mass_outside(&self, lo: SiteIndex, hi: SiteIndex) -> f64 {
        self.site_masses()
            .filter(|&(j, _)| j < lo || j > hi)
            .map(|(_, p)| p)
            .sum()
    }

    /// Re-indexes onto `ℓ²(ℤ)`: `δ_j⁺ ↦ δ_{2j−1}`, `δ_j⁻ ↦ δ_{2j}`.
    pub fn to_cmv(&self) -> CmvVector {
        if self.is_empty() {
            return CmvVector::zero();
        }
        CmvVector {
            start: 2 * self.lo - 1,
            amps: self.amps.clone(),
        }
    }

    /// Inverse of [`WalkState::to_cmv`].
    pub fn from_cmv(seq: &CmvVector) -> WalkState {
        if seq.amps.is_empty() {
            return WalkState::zero();
        }
        let mut amps = Vec::with_capacity(seq.amps.len() + 2);
        let lo = if seq.start.rem_euclid(2) == 0 {
            // First entry is ψ⁻ of site start/2.
            amps.push(ZERO);
            seq.start / 2
        } else {
            (seq.start + 1) / 2
        };
        amps.extend_from_slice(&seq.amps);
        if amps.len() % 2 == 1 {
            amps.push(ZERO);
        }
        WalkState { lo, amps }
    }

    /// Writes `site, re_plus, im_plus, re_minus, im_minus` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for (j, p, m) in self.sites() {
            w.serialize(StateRow {
                site: j,
                re_plus: p.re,
                im_plus: p.im,
                re_minus: m.re,
                im_minus: m.im,
            })?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    /// Reads rows written by [`WalkState::write_csv`]. Sites may be sparse or
    /// unordered; missing sites are zero.
    pub fn read_csv<R: Read>(reader: R) -> Result<WalkState> {
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut state = WalkState::zero();
        for row in r.deserialize() {
            let row: StateRow = row?;
            state.set(row.site, Spin::Plus, Complex64::new(row.re_plus, row.im_plus));
            state.set(row.site, Spin::Minus, Complex64::new(row.re_minus, row.im_minus));
        }
        Ok(state)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct StateRow {
    site: i64,
    re_plus: f64,
    im_plus: f64,
    re_minus: f64,
    im_minus: f64,
}

/// Finitely supported vector over [`CmvIndex`], stored contiguously from
/// `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct CmvVector {
    start: i64,
    amps: Vec<Complex64>,
}

impl CmvVector {
    pub fn zero() -> Self {
        CmvVector {
            start: 0,
            amps: Vec::new(),
        }
    }

    pub fn new(start: i64, amps: Vec<Complex64>) -> Self {
        CmvVector { start, amps }
    }

    /// Unit vector `δ_n`.
    pub fn unit(n: CmvIndex) -> Self {
        CmvVector {
            start: n.0,
            amps: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Last index held; `start - 1` when empty.
    pub fn end(&self) -> i64 {
        self.start + self.amps.len() as i64 - 1
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn get(&self, n: i64) -> Complex64 {
        if n < self.start || n > self.end() {
            return ZERO;
        }
        self.amps[(n - self.start) as usize]
    }

    pub(crate) fn slot_mut(&mut self, n: i64) -> &mut Complex64 {
        &mut self.amps[(n - self.start) as usize]
    }

    /// Grows the stored range to cover `[lo, hi]`.
    pub fn extend_to(&mut self, lo: i64, hi: i64) {
        if self.amps.is_empty() {
            self.start = lo;
            self.amps = vec![ZERO; (hi - lo + 1) as usize];
            return;
        }
        let new_lo = lo.min(self.start);
        let new_hi = hi.max(self.end());
        let mut amps = vec![ZERO; (new_hi - new_lo + 1) as usize];
        let off = (self.start - new_lo) as usize;
        amps[off..off + self.amps.len()].copy_from_slice(&self.amps);
        self.start = new_lo;
        self.amps = amps;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.amps
            .iter()
            .enumerate()
            .map(move |(i, &z)| (self.start + i as i64, z))
    }

    /// Position operator on the CMV side: multiplication by `⌈n/2⌉`.
    pub fn apply_position(&self) -> CmvVector {
        let amps = self
            .iter()
            .map(|(n, z)| z * CmvIndex(n).site() as f64)
            .collect();
        CmvVector {
            start: self.start,
            amps,
        }
    }
}

//! i.i.d. random coins, good-index extraction and the block/gap diagnostics
//! used to test the almost-sure zero-velocity regime.
//!
//! Randomness comes from `ChaCha8Rng`. Site `n ≥ 1` of channel `c` reads two
//! `u64` words at word position `4n` of stream `2c + 1`; site `n ≤ 0` reads
//! position `4|n|` of stream `2c + 2`. Any site can therefore be regenerated in
//! isolation and the values do not depend on the memoized range.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, GapStats};
use crate::coins::{CoinSequence, LocalCoin};
use crate::error::{Error, Result};
use crate::lattice::SiteIndex;
use crate::observables::{self, StateSpec};
use crate::subsequence::SparseSubsequence;
use crate::walk::SplitStepWalk;

/// Identifier stamped into every random artifact.
pub const GENERATOR_ID: &str = "ChaCha8Rng/rand_chacha-0.9; stream layout v1";

/// Minimum number of good indices per side before a scan is considered usable.
pub const MIN_GOOD_PER_SIDE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SamplerKind {
    /// Density `α x^{α−1}` on `(0, 1)`, so `F(x) = x^α`.
    PowerLaw,
    /// `a ~ U[−1, 1]`, so `F(x) = x`.
    Uniform,
    /// `|a| = 0` with probability `p0`, otherwise power law.
    AtomMixture { p0: f64 },
}

/// Law of `|a(n)|` together with the declared lower tail `F(x) ≥ c x^α` on
/// `(0, x0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailDistribution {
    pub kind: SamplerKind,
    pub alpha: f64,
    pub c: f64,
    pub x0: f64,
}

impl TailDistribution {
    pub fn power_law(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(TailDistribution { kind: SamplerKind::PowerLaw, alpha, c: 1.0, x0: 1.0 })
    }

    pub fn uniform() -> Self {
        TailDistribution { kind: SamplerKind::Uniform, alpha: 1.0, c: 1.0, x0: 1.0 }
    }

    pub fn atom_mixture(p0: f64, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::InvalidParameter(format!("atom mass {p0} outside [0, 1]")));
        }
        Ok(TailDistribution { kind: SamplerKind::AtomMixture { p0 }, alpha, c: 1.0, x0: 1.0 })
    }

    /// Exact `F(x) = P(|a| ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return match self.kind {
                SamplerKind::AtomMixture { p0 } if x == 0.0 => p0,
                _ => 0.0,
            };
        }
        let x = x.min(1.0);
        match self.kind {
            SamplerKind::PowerLaw => x.powf(self.alpha),
            SamplerKind::Uniform => x,
            SamplerKind::AtomMixture { p0 } => p0 + (1.0 - p0) * x.powf(self.alpha),
        }
    }

    /// Declared lower envelope `c x^α`.
    pub fn lower_envelope(&self, x: f64) -> f64 {
        self.c * x.powf(self.alpha)
    }

    /// Transmission entry from two uniform words.
    fn sample(&self, u1: u64, u2: u64) -> f64 {
        let sign = if u1 & 1 == 0 { 1.0 } else { -1.0 };
        match self.kind {
            SamplerKind::PowerLaw => sign * unit_f64(u2).powf(1.0 / self.alpha),
            SamplerKind::Uniform => 2.0 * unit_f64(u2) - 1.0,
            SamplerKind::AtomMixture { p0 } => {
                if unit_f64(u1) < p0 {
                    0.0
                } else {
                    sign * unit_f64(u2).powf(1.0 / self.alpha)
                }
            }
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} outside (0, 1]")));
    }
    Ok(())
}

/// Uniform in `[0, 1)` from the top 53 bits.
fn unit_f64(u: u64) -> f64 {
    (u >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Seeded i.i.d. coins, memoized on `[−n_max, n_max]`.
#[derive(Debug, Clone)]
pub struct RandomCoins {
    dist: TailDistribution,
    seed: u64,
    channel: u64,
    n_max: i64,
    /// Real transmission entries for sites `−n_max..=n_max`.
    memo: Vec<f64>,
}

impl RandomCoins {
    pub fn new(dist: TailDistribution, seed: u64, n_max: usize) -> Self {
        Self::with_channel(dist, seed, 0, n_max)
    }

    /// Independent sequence for the same seed; `C₁` and `C₂` use channels 0
    /// and 1.
    pub fn with_channel(dist: TailDistribution, seed: u64, channel: u64, n_max: usize) -> Self {
        let n_max = n_max as i64;
        let mut memo = vec![0.0; (2 * n_max + 1) as usize];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // n ≥ 1
        rng.set_stream(2 * channel + 1);
        rng.set_word_pos(4);
        for n in 1..=n_max {
            let (u1, u2) = (rng.next_u64(), rng.next_u64());
            memo[(n + n_max) as usize] = dist.sample(u1, u2);
        }
        // n ≤ 0
        rng.set_stream(2 * channel + 2);
        rng.set_word_pos(0);
        for k in 0..=n_max {
            let (u1, u2) = (rng.next_u64(), rng.next_u64());
            memo[(n_max - k) as usize] = dist.sample(u1, u2);
        }
        RandomCoins { dist, seed, channel, n_max, memo }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn channel(&self) -> u64 {
        self.channel
    }

    pub fn n_max(&self) -> usize {
        self.n_max as usize
    }

    pub fn distribution(&self) -> &TailDistribution {
        &self.dist
    }

    fn generate(&self, n: SiteIndex) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        if n >= 1 {
            rng.set_stream(2 * self.channel + 1);
            rng.set_word_pos(4 * n as u128);
        } else {
            rng.set_stream(2 * self.channel + 2);
            rng.set_word_pos(4 * n.unsigned_abs() as u128);
        }
        let (u1, u2) = (rng.next_u64(), rng.next_u64());
        self.dist.sample(u1, u2)
    }

    /// Transmission entry `a(n)` (real).
    pub fn a_at(&self, n: SiteIndex) -> f64 {
        if n.abs() <= self.n_max {
            self.memo[(n + self.n_max) as usize]
        } else {
            self.generate(n)
        }
    }

    pub fn abs_at(&self, n: SiteIndex) -> f64 {
        self.a_at(n).abs()
    }

    pub fn coin_at(&self, n: SiteIndex) -> LocalCoin {
        LocalCoin::from_transmission(Complex64::new(self.a_at(n), 0.0))
            .expect("sampled |a| ≤ 1")
    }

    pub fn materialize(&self, lo: SiteIndex, hi: SiteIndex) -> Vec<LocalCoin> {
        (lo..=hi).map(|n| self.coin_at(n)).collect()
    }
}

/// Samples a coin sequence; deterministic in `(dist, seed)`.
pub fn sample_coins(dist: &TailDistribution, seed: u64, n_max: usize) -> CoinSequence {
    CoinSequence::random(RandomCoins::new(dist.clone(), seed, n_max))
}

/// `P(|a| ≤ x)` over the sampled values at `1..=n_max` and `−n_max..=−1`.
pub fn empirical_cdf(coins: &RandomCoins, x: f64) -> f64 {
    let n = coins.n_max;
    let hits = (-n..=n)
        .filter(|&k| k != 0 && coins.abs_at(k) <= x)
        .count();
    hits as f64 / (2 * n) as f64
}

/// Good indices `k ≥ 1` with `|a(±k)| ≤ 1/k`, collected per side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodIndexScan {
    pub n_max: usize,
    /// Positive good sites, increasing.
    pub positive: Vec<SiteIndex>,
    /// Distances `k` with `−k` good, increasing.
    pub negative: Vec<SiteIndex>,
    pub insufficient_positive: bool,
    pub insufficient_negative: bool,
}

impl GoodIndexScan {
    pub fn side(&self, positive: bool) -> &[SiteIndex] {
        if positive {
            &self.positive
        } else {
            &self.negative
        }
    }

    /// Number of good indices in `[1, n]` on one side.
    pub fn count_up_to(&self, positive: bool, n: SiteIndex) -> usize {
        self.side(positive).partition_point(|&k| k <= n)
    }

    pub fn is_sufficient(&self) -> bool {
        !self.insufficient_positive && !self.insufficient_negative
    }

    /// Bi-infinite subsequence `… < −k₂ < −k₁ < 0 < j₁ < j₂ < …` with `j_0 = 0`.
    pub fn to_subsequence(&self) -> Result<SparseSubsequence> {
        let mut sites: Vec<SiteIndex> = self.negative.iter().rev().map(|&k| -k).collect();
        sites.push(0);
        sites.extend_from_slice(&self.positive);
        SparseSubsequence::explicit(&sites)
    }

    /// `(j_m, g_m / j_m)` for consecutive good indices on one side.
    pub fn ratios(&self, positive: bool) -> Vec<(SiteIndex, f64)> {
        self.side(positive)
            .windows(2)
            .map(|w| (w[0], (w[1] - w[0]) as f64 / w[0] as f64))
            .collect()
    }
}

/// Scans `1..=n_max` on both sides for `|a(±k)| ≤ 1/k`.
pub fn extract_good_subsequence<F>(abs_a: F, n_max: usize) -> GoodIndexScan
where
    F: Fn(SiteIndex) -> f64,
{
    let n = n_max as i64;
    let scan = |sign: i64| -> Vec<SiteIndex> {
        (1..=n)
            .filter(|&k| abs_a(sign * k) <= 1.0 / k as f64)
            .collect()
    };
    let positive = scan(1);
    let negative = scan(-1);
    GoodIndexScan {
        n_max,
        insufficient_positive: positive.len() < MIN_GOOD_PER_SIDE,
        insufficient_negative: negative.len() < MIN_GOOD_PER_SIDE,
        positive,
        negative,
    }
}

/// Convenience wrapper over a [`CoinSequence`].
pub fn extract_good_from_coins(coins: &CoinSequence, n_max: usize) -> GoodIndexScan {
    extract_good_subsequence(|n| coins.transmission_abs(n), n_max)
}

/// `h(n) = ⌈n^α (ln n)²⌉`.
pub fn block_length(n: SiteIndex, alpha: f64) -> SiteIndex {
    let x = n as f64;
    (x.powf(alpha) * x.ln().powi(2)).ceil() as SiteIndex
}

/// `j^{α−1} (ln j)² + 1/j`.
pub fn ratio_envelope(j: SiteIndex, alpha: f64) -> f64 {
    let x = j as f64;
    x.powf(alpha - 1.0) * x.ln().powi(2) + 1.0 / x
}

/// Exact `P(no good index in [2ⁿ, 2ⁿ⁺¹))` when `|a|` is uniform.
pub fn uniform_dyadic_empty_probability(n: u32) -> f64 {
    let p = (1u64 << n) as f64;
    (p - 1.0) / (2.0 * p - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideDiagnostics {
    pub good_count: usize,
    /// Good `n` with no further good index in `(n, n + h(n)]` (only counted
    /// when `1 ≤ h(n)` and `n + h(n) ≤ n_max`).
    pub block_violations: Vec<SiteIndex>,
    /// Indices `j_m` where `g_m / j_m` exceeds the envelope.
    pub envelope_violations: Vec<SiteIndex>,
    /// `(n, empty)` for each dyadic block `[2ⁿ, 2ⁿ⁺¹) ⊆ [1, n_max]`.
    pub dyadic_blocks: Vec<(u32, bool)>,
    /// Max of `g_m / j_m` over the last half of the consecutive pairs.
    pub max_ratio_tail: f64,
}

impl SideDiagnostics {
    pub fn empty_dyadic_fraction(&self, range: std::ops::RangeInclusive<u32>) -> Option<f64> {
        let sel: Vec<bool> = self
            .dyadic_blocks
            .iter()
            .filter(|(n, _)| range.contains(n))
            .map(|&(_, e)| e)
            .collect();
        if sel.is_empty() {
            return None;
        }
        Some(sel.iter().filter(|&&e| e).count() as f64 / sel.len() as f64)
    }

    /// Block violations per dyadic scale of `n`.
    pub fn violations_per_scale(&self) -> Vec<(u32, usize)> {
        let mut out: Vec<(u32, usize)> = Vec::new();
        for &n in &self.block_violations {
            let scale = 63 - (n as u64).leading_zeros();
            match out.last_mut() {
                Some((s, c)) if *s == scale => *c += 1,
                _ => out.push((scale, 1)),
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockGapReport {
    pub alpha: f64,
    pub n_max: usize,
    pub positive: SideDiagnostics,
    pub negative: SideDiagnostics,
}

/// Block events, ratio envelope and dyadic emptiness for both sides.
pub fn block_gap_diagnostics(scan: &GoodIndexScan, alpha: f64) -> BlockGapReport {
    let side = |good: &[SiteIndex]| -> SideDiagnostics {
        let n_max = scan.n_max as i64;
        let mut block_violations = Vec::new();
        for (i, &n) in good.iter().enumerate() {
            let h = block_length(n, alpha);
            // h(1) = 0: empty block, nothing to check.
            if h < 1 || n + h > n_max {
                continue;
            }
            let next = good.get(i + 1).copied();
            if next.is_none_or(|k| k > n + h) {
                block_violations.push(n);
            }
        }
        let envelope_violations = good
            .windows(2)
            .filter(|w| ((w[1] - w[0]) as f64 / w[0] as f64) > ratio_envelope(w[0], alpha))
            .map(|w| w[0])
            .collect();
        let mut dyadic_blocks = Vec::new();
        let mut n = 0u32;
        while (1i64 << (n + 1)) - 1 <= n_max {
            let lo = 1i64 << n;
            let hi = (1i64 << (n + 1)) - 1;
            let i = good.partition_point(|&k| k < lo);
            let empty = good.get(i).is_none_or(|&k| k > hi);
            dyadic_blocks.push((n, empty));
            n += 1;
        }
        let ratios: Vec<f64> = good
            .windows(2)
            .map(|w| (w[1] - w[0]) as f64 / w[0] as f64)
            .collect();
        let max_ratio_tail = ratios[ratios.len() / 2..]
            .iter()
            .copied()
            .fold(0.0, f64::max);
        SideDiagnostics {
            good_count: good.len(),
            block_violations,
            envelope_violations,
            dyadic_blocks,
            max_ratio_tail,
        }
    };
    BlockGapReport {
        alpha,
        n_max: scan.n_max,
        positive: side(&scan.positive),
        negative: side(&scan.negative),
    }
}

/// Parameters of the multi-seed pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomExperiment {
    pub dist: TailDistribution,
    pub seeds: Vec<u64>,
    pub n_max: usize,
    pub t_max: usize,
    pub n_range: std::ops::RangeInclusive<usize>,
    pub states: Vec<StateSpec>,
}

impl RandomExperiment {
    pub fn new(dist: TailDistribution, seeds: Vec<u64>, n_max: usize, t_max: usize) -> Self {
        RandomExperiment {
            dist,
            seeds,
            n_max,
            t_max,
            n_range: 0..=12,
            states: observables::localized_family(),
        }
    }
}

/// One CSV row of the random scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRow {
    pub seed: u64,
    pub n_max: usize,
    pub good_count_pos: usize,
    pub good_count_neg: usize,
    pub max_ratio_tail: f64,
    pub bound_estimate: f64,
    pub vhat_tmax: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub row: SeedRow,
    /// Enough good indices, few empty dyadic blocks, small tail ratios.
    pub hypotheses_hold: bool,
    pub empty_dyadic_fraction: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomExperimentReport {
    pub generator: String,
    pub outcomes: Vec<SeedOutcome>,
    pub median_vhat: f64,
    pub median_bound: f64,
    pub hypotheses_fraction: f64,
    /// `false` when the hypotheses fail on most seeds.
    pub conclusive: bool,
}

impl RandomExperimentReport {
    pub fn rows(&self) -> impl Iterator<Item = &SeedRow> {
        self.outcomes.iter().map(|o| &o.row)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in self.rows() {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

/// Largest tolerated empty-dyadic fraction for "hypotheses hold".
const MAX_EMPTY_DYADIC: f64 = 0.25;
/// Largest tolerated tail ratio `g_m / j_m`.
const MAX_TAIL_RATIO: f64 = 0.5;

fn run_seed(exp: &RandomExperiment, seed: u64) -> Result<SeedOutcome> {
    let c1 = RandomCoins::with_channel(exp.dist.clone(), seed, 0, exp.n_max);
    let c2 = RandomCoins::with_channel(exp.dist.clone(), seed, 1, exp.n_max);
    let c1 = CoinSequence::random(c1);
    let c2 = CoinSequence::random(c2);

    let mut best: Option<(f64, f64)> = None;
    let mut scan2 = None;
    for (k, coins) in [(1u8, &c1), (2u8, &c2)] {
        let scan = extract_good_from_coins(coins, exp.n_max);
        if scan.is_sufficient() {
            let seq = scan.to_subsequence()?;
            let stats = bounds::gap_stats(&seq)?;
            let report = bounds::theorem_general_bound(
                &[bounds::BoundInput { k, seq: &seq, coins, q: Some(stats.q()) }],
                exp.n_range.clone(),
            )?;
            let b = report.best.value;
            if best.is_none_or(|(v, _)| b < v) {
                best = Some((b, stats.q()));
            }
        }
        if k == 2 {
            scan2 = Some(scan);
        }
    }
    let scan = scan2.expect("scanned k = 2");
    let diag = block_gap_diagnostics(&scan, exp.dist.alpha);
    let range = 5..=diag.positive.dyadic_blocks.len().saturating_sub(1) as u32;
    let empty = [&diag.positive, &diag.negative]
        .iter()
        .filter_map(|d| d.empty_dyadic_fraction(range.clone()))
        .fold(0.0, f64::max);
    let max_ratio_tail = diag.positive.max_ratio_tail.max(diag.negative.max_ratio_tail);

    let walk = SplitStepWalk::new(c1, c2);
    let vhat = observables::max_vhat_at(&walk, &exp.states, exp.t_max)?;
    let (bound_estimate, q) = best.unwrap_or((f64::INFINITY, f64::INFINITY));
    let hypotheses_hold = scan.is_sufficient()
        && best.is_some()
        && empty <= MAX_EMPTY_DYADIC
        && max_ratio_tail <= MAX_TAIL_RATIO;
    Ok(SeedOutcome {
        row: SeedRow {
            seed,
            n_max: exp.n_max,
            good_count_pos: scan.positive.len(),
            good_count_neg: scan.negative.len(),
            max_ratio_tail,
            bound_estimate,
            vhat_tmax: vhat,
        },
        hypotheses_hold,
        empty_dyadic_fraction: empty,
        q,
    })
}

/// Samples, scans, bounds and evolves every seed in parallel.
pub fn random_zero_velocity_experiment(exp: &RandomExperiment) -> Result<RandomExperimentReport> {
    if exp.seeds.is_empty() {
        return Err(Error::InvalidArgument("no seeds given".into()));
    }
    let outcomes = exp
        .seeds
        .par_iter()
        .map(|&s| run_seed(exp, s))
        .collect::<Result<Vec<_>>>()?;
    let median_vhat = median(outcomes.iter().map(|o| o.row.vhat_tmax).collect());
    let median_bound = median(outcomes.iter().map(|o| o.row.bound_estimate).collect());
    let hypotheses_fraction =
        outcomes.iter().filter(|o| o.hypotheses_hold).count() as f64 / outcomes.len() as f64;
    Ok(RandomExperimentReport {
        generator: GENERATOR_ID.to_string(),
        outcomes,
        median_vhat,
        median_bound,
        hypotheses_fraction,
        conclusive: hypotheses_fraction > 0.5,
    })
}

/// Median (upper median for even counts); NaN for an empty input.
pub fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Gap statistics of a scan, for reports.
pub fn scan_gap_stats(scan: &GoodIndexScan) -> Result<GapStats> {
    bounds::gap_stats(&scan.to_subsequence()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn memo_matches_on_demand_generation() {
        let dist = TailDistribution::power_law(0.5).unwrap();
        let small = RandomCoins::new(dist.clone(), 3, 5);
        let large = RandomCoins::new(dist, 3, 200);
        for n in -200..=200 {
            assert_eq!(small.a_at(n), large.a_at(n));
        }
        let other = RandomCoins::with_channel(small.distribution().clone(), 3, 1, 5);
        assert_ne!(other.a_at(1), small.a_at(1));
    }

    #[test]
    fn power_law_cdf() {
        let d = TailDistribution::power_law(0.5).unwrap();
        assert!((d.cdf(0.25) - 0.5).abs() < 1e-15);
        let coins = RandomCoins::new(d.clone(), 11, 50_000);
        for x in [0.01, 0.1, 0.5] {
            let emp = empirical_cdf(&coins, x);
            assert!((emp - d.cdf(x)).abs() < 0.01, "x = {x}: {emp}");
        }
    }

    #[test]
    fn atom_mass_lower_bound() {
        let d = TailDistribution::atom_mixture(0.1, 0.5).unwrap();
        let coins = RandomCoins::new(d, 5, 20_000);
        assert!(empirical_cdf(&coins, 1e-12) > 0.09);
        let all = TailDistribution::atom_mixture(1.0, 0.5).unwrap();
        let coins = RandomCoins::new(all, 5, 100);
        assert!((-100..=100).all(|n| coins.a_at(n) == 0.0));
    }

    #[test]
    fn uniform_cdf_is_identity() {
        let d = TailDistribution::uniform();
        assert_eq!(d.cdf(0.3), 0.3);
        let coins = RandomCoins::new(d, 1, 20_000);
        assert!((empirical_cdf(&coins, 0.3) - 0.3).abs() < 0.01);
    }

    #[test]
    fn deterministic_scans() {
        let everywhere = extract_good_subsequence(|n| 1.0 / (n.unsigned_abs() as f64 + 1.0), 100);
        assert_eq!(everywhere.positive, (1..=100).collect::<Vec<_>>());
        assert!(everywhere.positive.windows(2).all(|w| w[1] - w[0] == 1));
        let none = extract_good_subsequence(|_| 1.0, 100);
        // |a(1)| ≤ 1/1 always holds.
        assert_eq!(none.positive, vec![1]);
        assert!(none.insufficient_positive && none.insufficient_negative);
    }

    #[test]
    fn good_indices_satisfy_definition() {
        let dist = TailDistribution::power_law(0.5).unwrap();
        let coins = RandomCoins::new(dist, 17, 10_000);
        let scan = extract_good_subsequence(|n| coins.abs_at(n), 10_000);
        for &k in &scan.positive {
            assert!(coins.abs_at(k) <= 1.0 / k as f64);
        }
        for &k in &scan.negative {
            assert!(coins.abs_at(-k) <= 1.0 / k as f64);
        }
        let seq = scan.to_subsequence().unwrap();
        assert_eq!(seq.j(0), 0);
    }

    #[test]
    fn dyadic_probability() {
        assert_eq!(uniform_dyadic_empty_probability(0), 0.0);
        assert!((uniform_dyadic_empty_probability(1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((uniform_dyadic_empty_probability(20) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn block_length_values() {
        assert_eq!(block_length(1, 0.5), 0);
        // √100 · (ln 100)² = 212.07…
        assert_eq!(block_length(100, 0.5), 213);
    }

    #[test]
    fn diagnostics_on_regular_scan() {
        let scan = extract_good_subsequence(|n| 1.0 / (n.unsigned_abs() as f64 + 1.0), 1000);
        let d = block_gap_diagnostics(&scan, 0.5);
        assert!(d.positive.block_violations.is_empty());
        assert!(d.positive.envelope_violations.is_empty());
        assert_eq!(d.positive.empty_dyadic_fraction(0..=8), Some(0.0));
    }
}

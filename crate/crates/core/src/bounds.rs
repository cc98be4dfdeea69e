//! Closed-form velocity bounds along a sparse subsequence `(j_m)`.
//!
//! All suprema and limsups over `m` are truncated to the materialized horizon.
//! A limsup is estimated as the max over the last half of the available
//! terms, and every report carries a last-quartile trend so callers can judge
//! whether the tail has settled.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coins::CoinSequence;
use crate::error::{Error, Result};
use crate::subsequence::SparseSubsequence;

/// Minimum materialized blocks per side for tail estimates.
pub const MIN_HORIZON: usize = 8;

/// Default `N` sweep.
pub const DEFAULT_N_RANGE: RangeInclusive<usize> = 0..=12;

/// Tail summary of a finite sequence of nonnegative terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    /// Max over the last half (limsup estimate).
    pub limsup: f64,
    /// Max over the first half.
    pub head: f64,
    /// Max over the last quartile.
    pub last_quartile: f64,
    /// Max over the quartile before it.
    pub prev_quartile: f64,
    pub len: usize,
}

impl Tail {
    pub fn of(terms: &[f64]) -> Option<Tail> {
        let n = terms.len();
        if n == 0 {
            return None;
        }
        let max = |s: &[f64]| s.iter().copied().fold(0.0, f64::max);
        let half = n / 2;
        let q3 = (3 * n) / 4;
        Some(Tail {
            limsup: max(&terms[half..]),
            head: max(&terms[..half.max(1)]),
            last_quartile: max(&terms[q3..]),
            prev_quartile: max(&terms[half..q3.max(half)]),
            len: n,
        })
    }

    /// The tail is not growing.
    pub fn settled(&self) -> bool {
        self.last_quartile <= self.prev_quartile * (1.0 + 1e-12) || self.last_quartile == 0.0
    }

    /// The tail sits strictly below the head (or vanishes).
    pub fn decays(&self) -> bool {
        self.last_quartile == 0.0 || self.last_quartile < self.head
    }

    /// The tail does not exceed the head.
    pub fn bounded(&self) -> bool {
        self.limsup <= self.head * (1.0 + 1e-12)
    }
}

/// Relative-gap statistics `limsup g_m / |j_m|` per side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapStats {
    pub q_plus: f64,
    pub q_minus: f64,
    /// `max(q_plus, q_minus)`.
    pub estimate: f64,
    /// Closed-form value when the generator determines it.
    pub structural: Option<f64>,
    pub neg_horizon: usize,
    pub pos_horizon: usize,
    pub trend_plus: Tail,
    pub trend_minus: Tail,
    pub estimator: String,
}

impl GapStats {
    /// Structural value if known, otherwise the estimate.
    pub fn q(&self) -> f64 {
        self.structural.unwrap_or(self.estimate)
    }
}

/// `g_m / j_m` for `1 ≤ m < pos_horizon`.
fn ratios_plus(seq: &SparseSubsequence) -> Vec<f64> {
    (1..seq.pos_horizon() as i64)
        .map(|m| seq.gap(m).unwrap() as f64 / seq.j(m) as f64)
        .collect()
}

/// `g_m / |j_m|` for `m = −1, −2, …` while `g_m` is defined.
fn ratios_minus(seq: &SparseSubsequence) -> Vec<f64> {
    (1..seq.neg_horizon() as i64)
        .map(|k| seq.gap(-k).unwrap() as f64 / seq.j(-k).unsigned_abs() as f64)
        .collect()
}

pub fn gap_stats(seq: &SparseSubsequence) -> Result<GapStats> {
    let got = seq.neg_horizon().min(seq.pos_horizon());
    if got < MIN_HORIZON {
        return Err(Error::InsufficientData { needed: MIN_HORIZON, got });
    }
    let plus = Tail::of(&ratios_plus(seq)).unwrap();
    let minus = Tail::of(&ratios_minus(seq)).unwrap();
    let estimate = plus.limsup.max(minus.limsup);
    if !estimate.is_finite() {
        return Err(Error::NotInJ { q: estimate });
    }
    Ok(GapStats {
        q_plus: plus.limsup,
        q_minus: minus.limsup,
        estimate,
        structural: seq.structural_q(),
        neg_horizon: seq.neg_horizon(),
        pos_horizon: seq.pos_horizon(),
        trend_plus: plus,
        trend_minus: minus,
        estimator: "max of g_m/|j_m| over the last half of materialized m per side".into(),
    })
}

/// `1 − (1 + q)^{−(N+1)}`.
pub fn relative_bound_constant(q: f64, n: usize) -> f64 {
    1.0 - (1.0 + q).powi(-(n as i32 + 1))
}

/// [`relative_bound_constant`] with `q` taken from [`gap_stats`].
pub fn relative_bound_for(seq: &SparseSubsequence, n: usize) -> Result<f64> {
    Ok(relative_bound_constant(gap_stats(seq)?.q(), n))
}

/// `w_i = j_{−i} − j_{−i−1}`, the gap entering the negative tail functional.
fn neg_gap(seq: &SparseSubsequence, i: i64) -> Option<i64> {
    Some(seq.try_j(-i)? - seq.try_j(-i - 1)?)
}

/// `f⁺(N) = sup_{m ≥ N} g_{m−N} |a(j_{m+1})|` over `m + 1 ≤ pos_horizon`.
pub fn f_plus(seq: &SparseSubsequence, coins: &CoinSequence, n: usize) -> f64 {
    let n = n as i64;
    (n..seq.pos_horizon() as i64)
        .map(|m| seq.gap(m - n).unwrap() as f64 * coins.transmission_abs(seq.j(m + 1)))
        .fold(0.0, f64::max)
}

/// `f⁻(N) = sup_{m ≥ N} w_{m−N} |a(j_{−m})|` with `w_i = j_{−i} − j_{−i−1}`.
pub fn f_minus(seq: &SparseSubsequence, coins: &CoinSequence, n: usize) -> f64 {
    let n = n as i64;
    (n..=seq.neg_horizon() as i64)
        .filter_map(|m| Some(neg_gap(seq, m - n)? as f64 * coins.transmission_abs(seq.try_j(-m)?)))
        .fold(0.0, f64::max)
}

/// One `(k, N)` evaluation, serialized as a JSON object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub k: u8,
    #[serde(rename = "N")]
    pub n: usize,
    pub value: f64,
    pub fk_plus: f64,
    pub fk_minus: f64,
    pub q: f64,
    pub horizon: usize,
    /// Best value over `N` for this `k`.
    pub best: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestBound {
    pub k: u8,
    #[serde(rename = "N")]
    pub n: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub best: BestBound,
    /// `true` when every `q` came from the generator rather than an estimate.
    pub certified_q: bool,
    pub n_range: (usize, usize),
}

impl BoundReport {
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn values_for(&self, k: u8) -> Vec<f64> {
        self.rows.iter().filter(|r| r.k == k).map(|r| r.value).collect()
    }
}

/// Subsequence and active coins for one `k`.
#[derive(Debug, Clone, Copy)]
pub struct BoundInput<'a> {
    pub k: u8,
    pub seq: &'a SparseSubsequence,
    /// `a_k` along the lattice.
    pub coins: &'a CoinSequence,
    /// Overrides the `q` from [`gap_stats`].
    pub q: Option<f64>,
}

/// `(1+q)^{N+1} max{f_k⁺(N), f_k⁻(N)}` for every input and `N`, with the
/// minimum over both.
pub fn theorem_general_bound(inputs: &[BoundInput<'_>], n_range: RangeInclusive<usize>) -> Result<BoundReport> {
    if inputs.is_empty() {
        return Err(Error::InvalidArgument("no subsequences given".into()));
    }
    if n_range.is_empty() {
        return Err(Error::InvalidArgument("empty N range".into()));
    }
    let mut rows = Vec::new();
    let mut certified = true;
    for inp in inputs {
        let q = match inp.q {
            Some(q) => {
                certified &= inp.seq.structural_q() == Some(q);
                q
            }
            None => {
                let stats = gap_stats(inp.seq)?;
                certified &= stats.structural.is_some();
                stats.q()
            }
        };
        if !q.is_finite() || q < 0.0 {
            return Err(Error::NotInJ { q });
        }
        let mut per: Vec<BoundRow> = n_range
            .clone()
            .into_par_iter()
            .map(|n| {
                let fp = f_plus(inp.seq, inp.coins, n);
                let fm = f_minus(inp.seq, inp.coins, n);
                let value = (1.0 + q).powi(n as i32 + 1) * fp.max(fm);
                BoundRow {
                    k: inp.k,
                    n,
                    value,
                    fk_plus: fp,
                    fk_minus: fm,
                    q,
                    horizon: inp.seq.horizon(),
                    best: 0.0,
                }
            })
            .collect();
        let best = per.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
        per.iter_mut().for_each(|r| r.best = best);
        rows.extend(per);
    }
    let best = rows
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .map(|r| BestBound { k: r.k, n: r.n, value: r.value })
        .unwrap();
    Ok(BoundReport {
        rows,
        best,
        certified_q: certified,
        n_range: (*n_range.start(), *n_range.end()),
    })
}

/// Tail-estimated `max{limsup j_{m+1}|a(j_m)|, limsup |j_{−(m+1)}||a(j_{−m})|}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapWeightedBound {
    pub value: f64,
    pub plus: Option<Tail>,
    pub minus: Option<Tail>,
    /// Both sides present and neither tail growing.
    pub conclusive: bool,
    pub note: String,
}

pub fn gap_weighted_bound(seq: &SparseSubsequence, coins: &CoinSequence) -> GapWeightedBound {
    let plus: Vec<f64> = (1..seq.pos_horizon() as i64)
        .map(|m| seq.j(m + 1) as f64 * coins.transmission_abs(seq.j(m)))
        .collect();
    let minus: Vec<f64> = (1..seq.neg_horizon() as i64)
        .map(|m| seq.j(-(m + 1)).unsigned_abs() as f64 * coins.transmission_abs(seq.j(-m)))
        .collect();
    let plus = Tail::of(&plus);
    let minus = Tail::of(&minus);
    let side = |t: &Option<Tail>| t.map_or(f64::INFINITY, |t| t.limsup);
    let value = side(&plus).max(side(&minus));
    let growing = [plus, minus].iter().flatten().any(|t| !t.settled());
    let (conclusive, note) = match (&plus, &minus) {
        (None, _) | (_, None) => (false, "no conclusion: a side has no materialized reflectors".to_string()),
        _ if growing => (false, "no conclusion: tail products grow along m".to_string()),
        _ => (true, "tail products settled".to_string()),
    };
    GapWeightedBound { value, plus, minus, conclusive, note }
}

/// Which commutator surrogate for `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModifiedKind {
    /// `Q̃_N`: `j_{m−N}` on block `m ≥ N`, `j_{−(m−N)}` on block `−m`.
    Tilde,
    /// `Q̂_N`: `j_{m+1}` on block `m ≥ N`, `|j_{−m}|` on block `−m`.
    Hat,
}

/// Block-scalar operator on `⊕ ℋ_m`.
#[derive(Debug, Clone, Copy)]
pub struct ModifiedPosition<'a> {
    pub kind: ModifiedKind,
    pub n: usize,
    pub seq: &'a SparseSubsequence,
}

impl ModifiedPosition<'_> {
    /// Scalar on block `m`; `None` when the needed `j` is not materialized.
    pub fn block_value(&self, m: i64) -> Option<f64> {
        let n = self.n as i64;
        let v = match self.kind {
            ModifiedKind::Tilde => {
                if m >= n {
                    self.seq.try_j(m - n)?
                } else if m <= -n {
                    self.seq.try_j(m + n)?
                } else {
                    0
                }
            }
            ModifiedKind::Hat => {
                if m >= n {
                    self.seq.try_j(m + 1)?
                } else if m <= -n.max(1) {
                    self.seq.try_j(m)?.abs()
                } else {
                    0
                }
            }
        };
        Some(v as f64)
    }
}

/// Interfaces `s` with `|s| ≤ horizon − 1`: the range the truncated formulas
/// and dense windows cover.
pub fn interface_range(seq: &SparseSubsequence) -> RangeInclusive<i64> {
    let h = seq.horizon() as i64 - 1;
    -h..=h
}

/// `max_s |q_s − q_{s−1}|·|a(j_s)|` for arbitrary block values.
pub fn interface_norm(
    seq: &SparseSubsequence,
    coins: &CoinSequence,
    values: impl Fn(i64) -> Option<f64>,
    interfaces: RangeInclusive<i64>,
) -> f64 {
    interfaces
        .filter_map(|s| {
            let jump = (values(s)? - values(s - 1)?).abs();
            Some(jump * coins.transmission_abs(seq.try_j(s)?))
        })
        .fold(0.0, f64::max)
}

/// Closed form of `‖[Q̃_N, M]‖` or `‖[Q̂_N, M]‖` over [`interface_range`].
pub fn commutator_norm_formula(seq: &SparseSubsequence, coins: &CoinSequence, kind: ModifiedKind, n: usize) -> f64 {
    let h = seq.horizon() as i64;
    let ni = n as i64;
    let a = |site| coins.transmission_abs(site);
    match kind {
        ModifiedKind::Tilde => {
            // positive interfaces s = m + 1 ∈ [N + 1, H − 1]
            let plus = (ni..=h - 2)
                .map(|m| seq.gap(m - ni).unwrap() as f64 * a(seq.j(m + 1)))
                .fold(0.0, f64::max);
            // negative interfaces s = −m ∈ [−(H − 1), −N]
            let minus = (ni..=h - 1)
                .map(|m| neg_gap(seq, m - ni).unwrap() as f64 * a(seq.j(-m)))
                .fold(0.0, f64::max);
            plus.max(minus)
        }
        ModifiedKind::Hat if n == 0 => {
            let centre = (seq.j(1) - seq.j(-1).abs()).abs() as f64 * a(seq.j(0));
            let plus = (1..=h - 1)
                .map(|s| seq.gap(s).unwrap() as f64 * a(seq.j(s)))
                .fold(0.0, f64::max);
            let minus = (1..=h - 1)
                .map(|s| seq.gap(-s).unwrap() as f64 * a(seq.j(-s)))
                .fold(0.0, f64::max);
            centre.max(plus).max(minus)
        }
        ModifiedKind::Hat => {
            if ni > h - 1 {
                return 0.0;
            }
            let t1 = seq.j(ni + 1) as f64 * a(seq.j(ni));
            let t2 = seq.j(-ni).unsigned_abs() as f64 * a(seq.j(-ni + 1));
            let t3 = (ni..=h - 2)
                .map(|m| seq.gap(m + 1).unwrap() as f64 * a(seq.j(m + 1)))
                .fold(0.0, f64::max);
            let t4 = (ni + 1..=h)
                .map(|m| seq.gap(-m + 1).unwrap() as f64 * a(seq.j(-m + 1)))
                .fold(0.0, f64::max);
            t1.max(t2).max(t3).max(t4)
        }
    }
}

/// Same quantity computed interface by interface from the block values.
pub fn commutator_norm_by_interfaces(seq: &SparseSubsequence, coins: &CoinSequence, kind: ModifiedKind, n: usize) -> f64 {
    let q = ModifiedPosition { kind, n, seq };
    interface_norm(seq, coins, |m| q.block_value(m), interface_range(seq))
}

/// Upper bound `max{sup j_{m+1}|a(j_m)|, sup |j_{−m}||a(j_{−m+1})|}` over
/// `m ≥ N`, which dominates the `Q̂_N` commutator.
pub fn hat_commutator_upper(seq: &SparseSubsequence, coins: &CoinSequence, n: usize) -> f64 {
    let h = seq.horizon() as i64;
    let ni = n as i64;
    let plus = (ni.max(0)..=h - 1)
        .map(|m| seq.j(m + 1) as f64 * coins.transmission_abs(seq.j(m)))
        .fold(0.0, f64::max);
    let minus = (ni.max(1)..=h)
        .map(|m| seq.j(-m).unsigned_abs() as f64 * coins.transmission_abs(seq.j(-m + 1)))
        .fold(0.0, f64::max);
    plus.max(minus)
}

/// `min_k max{limsup_{n→∞}|a_k(n)|, limsup_{n→−∞}|a_k(n)|}` estimated over
/// `n_max/2 ≤ |n| ≤ n_max`.
pub fn apriori_bound(c1: &CoinSequence, c2: &CoinSequence, n_max: usize) -> f64 {
    let n = n_max.max(2) as i64;
    let side = |c: &CoinSequence| -> f64 {
        (n / 2..=n)
            .flat_map(|k| [c.transmission_abs(k), c.transmission_abs(-k)])
            .fold(0.0, f64::max)
    };
    side(c1).min(side(c2))
}

/// `(sup g_m) · max{limsup |a(j_m)|}` for bounded-gap subsequences.
pub fn uniform_gap_bound(seq: &SparseSubsequence, coins: &CoinSequence) -> f64 {
    let sup_g = (-(seq.neg_horizon() as i64) + 1..seq.pos_horizon() as i64)
        .filter_map(|m| seq.gap(m))
        .max()
        .unwrap_or(0) as f64;
    let plus: Vec<f64> = (1..=seq.pos_horizon() as i64)
        .map(|m| coins.transmission_abs(seq.j(m)))
        .collect();
    let minus: Vec<f64> = (1..=seq.neg_horizon() as i64)
        .map(|m| coins.transmission_abs(seq.j(-m)))
        .collect();
    let ls = |v: &[f64]| Tail::of(v).map_or(0.0, |t| t.limsup);
    sup_g * ls(&plus).max(ls(&minus))
}

/// Shifted-tail bound with `N = 1`:
/// `(1+q)² max{sup_{k≥M} g_{k−1}|a(j_{k+1})|, sup_{k≥M} w_{k−1}|a(j_{−(k+1)})|}`.
pub fn tail_shift_sweep(
    seq: &SparseSubsequence,
    coins: &CoinSequence,
    q: f64,
    shifts: RangeInclusive<usize>,
) -> Vec<(usize, f64)> {
    let a = |s| coins.transmission_abs(s);
    shifts
        .map(|shift| {
            let k0 = shift.max(1) as i64;
            let plus = (k0..seq.pos_horizon() as i64)
                .map(|k| seq.gap(k - 1).unwrap() as f64 * a(seq.j(k + 1)))
                .fold(0.0, f64::max);
            let minus = (k0..seq.neg_horizon() as i64)
                .map(|k| neg_gap(seq, k - 1).unwrap() as f64 * a(seq.j(-(k + 1))))
                .fold(0.0, f64::max);
            (shift, (1.0 + q).powi(2) * plus.max(minus))
        })
        .collect()
}

/// Which zero-velocity case the materialized data supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    UniformGaps,
    SublinearGaps,
    GapWeighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseClassification {
    /// `|a(j_m)|` decays on both sides.
    pub decay: bool,
    pub uniform_gaps: bool,
    pub sublinear_gaps: bool,
    pub gap_weighted: bool,
    /// First matching case, if any.
    pub case: Option<Case>,
    pub label: String,
}

/// Checks the three hypothesis families on both materialized tails.
pub fn classify(seq: &SparseSubsequence, coins: &CoinSequence) -> CaseClassification {
    // (a, g, |j|) per side for m = ±1, ±2, … with g defined
    let side = |sign: i64, len: usize| -> Vec<(f64, f64, f64)> {
        (1..len as i64)
            .map(|k| {
                let m = sign * k;
                let j = seq.j(m);
                (coins.transmission_abs(j), seq.gap(m).unwrap() as f64, j.unsigned_abs() as f64)
            })
            .collect()
    };
    let sides = [side(1, seq.pos_horizon()), side(-1, seq.neg_horizon())];
    let all = |f: &dyn Fn(&[(f64, f64, f64)]) -> bool| sides.iter().all(|s| s.len() >= 4 && f(s));
    let tail = |s: &[(f64, f64, f64)], f: &dyn Fn(&(f64, f64, f64)) -> f64| {
        Tail::of(&s.iter().map(f).collect::<Vec<_>>()).unwrap()
    };
    let decay = all(&|s| tail(s, &|x| x.0).decays());
    let uniform_gaps = decay && all(&|s| tail(s, &|x| x.1).bounded());
    let sublinear_gaps = decay
        && all(&|s| tail(s, &|x| x.1 / x.2).decays() && tail(s, &|x| x.2 * x.0).bounded());
    let gap_weighted = all(&|s| tail(s, &|x| x.2.max(x.1) * x.0).decays());
    let case = if uniform_gaps {
        Some(Case::UniformGaps)
    } else if sublinear_gaps {
        Some(Case::SublinearGaps)
    } else if gap_weighted {
        Some(Case::GapWeighted)
    } else {
        None
    };
    let label = match case {
        Some(Case::UniformGaps) => "case (i): uniformly bounded gaps",
        Some(Case::SublinearGaps) => "case (ii): sublinear gaps with quantitative decay",
        Some(Case::GapWeighted) => "case (iii): gap-weighted decay",
        None => "no conclusion",
    }
    .to_string();
    CaseClassification { decay, uniform_gaps, sublinear_gaps, gap_weighted, case, label }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coins::{Decay, LocalCoin, SparseOverlaySpec};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn overlay(seq: &SparseSubsequence, decay: Decay) -> CoinSequence {
        CoinSequence::sparse_overlay(SparseOverlaySpec { base: LocalCoin::hadamard(), sites: seq.clone(), decay })
            .unwrap()
    }

    #[test]
    fn gap_stats_examples() {
        let a = SparseSubsequence::arithmetic(5, 64).unwrap();
        let s = gap_stats(&a).unwrap();
        assert_eq!(s.q(), 0.0);
        assert!(s.estimate <= 1.0 / 32.0 + 1e-15);
        let g = SparseSubsequence::geometric(2, 20).unwrap();
        let s = gap_stats(&g).unwrap();
        assert_eq!(s.estimate, 1.0);
        assert_eq!(s.q(), 1.0);
        let p = SparseSubsequence::power(2, 200).unwrap();
        let s = gap_stats(&p).unwrap();
        // g_m/j_m = (2m+1)/m² at m = 100
        assert!((s.q_plus - 201.0 / 10_000.0).abs() < 1e-15);
        assert!(matches!(
            gap_stats(&SparseSubsequence::arithmetic(1, 7).unwrap()),
            Err(Error::InsufficientData { needed: 8, got: 7 })
        ));
    }

    #[test]
    fn relative_bound_examples() {
        for n in 0..20 {
            assert_eq!(relative_bound_constant(0.0, n), 0.0);
        }
        assert_eq!(relative_bound_constant(1.0, 1), 0.75);
        let mut prev = 0.0;
        for n in 0..50 {
            let c = relative_bound_constant(1.0, n);
            assert!(c > prev && c < 1.0);
            prev = c;
        }
    }

    #[test]
    fn reflectors_give_zero_bound() {
        let seq = SparseSubsequence::arithmetic(5, 50).unwrap();
        let coins = overlay(&seq, Decay::Zero);
        let r = theorem_general_bound(&[BoundInput { k: 2, seq: &seq, coins: &coins, q: None }], DEFAULT_N_RANGE).unwrap();
        assert!(r.rows.iter().all(|row| row.value == 0.0));
        assert_eq!(gap_weighted_bound(&seq, &coins).value, 0.0);
        for kind in [ModifiedKind::Tilde, ModifiedKind::Hat] {
            assert_eq!(commutator_norm_formula(&seq, &coins, kind, 2), 0.0);
        }
    }

    #[test]
    fn case_one_bound_decreases() {
        let seq = SparseSubsequence::arithmetic(5, 400).unwrap();
        let coins = overlay(&seq, Decay::InverseIndex { scale: 1.0 });
        let r = theorem_general_bound(&[BoundInput { k: 2, seq: &seq, coins: &coins, q: None }], 0..=40).unwrap();
        let v = r.values_for(2);
        assert!(v.windows(2).all(|w| w[1] < w[0]));
        // f⁺(N) = 5/(N+2), f⁻(N) = 5/(N+1) from the w_0 term.
        for (n, x) in v.iter().enumerate() {
            assert!((x - 5.0 / (n as f64 + 1.0)).abs() < 1e-14);
        }
        assert!(r.certified_q);
        assert_eq!(r.best.value, *v.last().unwrap());
        assert_eq!(classify(&seq, &coins).case, Some(Case::UniformGaps));
    }

    #[test]
    fn homogeneous_trivial_subsequence() {
        let seq = SparseSubsequence::arithmetic(1, 200).unwrap();
        let h = CoinSequence::homogeneous(Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)).unwrap();
        let r = theorem_general_bound(&[BoundInput { k: 1, seq: &seq, coins: &h, q: None }], 0..=5).unwrap();
        for row in &r.rows {
            assert!((row.value - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        }
        assert!((apriori_bound(&h, &h, 100) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((uniform_gap_bound(&seq, &h) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(classify(&seq, &h).case, None);
    }

    #[test]
    fn single_term_formula() {
        // g_{m0 − N} = 7 and |a(j_{m0+1})| = 0.3, zero elsewhere.
        let seq = SparseSubsequence::explicit(&[-40, -30, -20, -10, 0, 3, 10, 20, 30, 40]).unwrap();
        let coins = CoinSequence::table(
            [(20, LocalCoin::from_abs(0.3).unwrap())].into_iter().collect(),
            LocalCoin::reflector(),
        );
        // N = 1, m0 = 2: g_1 = 10 − 3 = 7 multiplies |a(j_3)| = |a(20)|.
        let v = commutator_norm_formula(&seq, &coins, ModifiedKind::Tilde, 1);
        assert!((v - 2.1).abs() < 1e-15);
        assert!((f_plus(&seq, &coins, 1) - 2.1).abs() < 1e-15);
    }

    #[test]
    fn f_minus_indexing_is_pinned() {
        // Negative gaps differ so each index shift gives a different value.
        let seq = SparseSubsequence::explicit(&[-30, -19, -11, -5, -2, 0, 1, 3, 6, 10, 15]).unwrap();
        let coins = CoinSequence::table(
            [(-11, LocalCoin::from_abs(0.5).unwrap())].into_iter().collect(),
            LocalCoin::reflector(),
        );
        // j_{−3} = −11; N = 1, m = 3: w_2 = j_{−2} − j_{−3} = 6.
        assert!((f_minus(&seq, &coins, 1) - 3.0).abs() < 1e-15);
        // N = 0, m = 3: w_3 = j_{−3} − j_{−4} = 8.
        assert!((f_minus(&seq, &coins, 0) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn hat_upper_dominates_exact() {
        let seq = SparseSubsequence::power(2, 30).unwrap();
        let coins = overlay(&seq, Decay::InverseSite { scale: 3.0 });
        for n in 0..5 {
            let exact = commutator_norm_formula(&seq, &coins, ModifiedKind::Hat, n);
            assert!(exact <= hat_commutator_upper(&seq, &coins, n) + 1e-12);
        }
    }

    #[test]
    fn case_three_gap_weighted() {
        let seq = SparseSubsequence::power(2, 300).unwrap();
        let coins = overlay(&seq, Decay::InverseSiteSquare);
        let g = gap_weighted_bound(&seq, &coins);
        assert!(g.value < 1e-3 && g.conclusive);
        assert!(classify(&seq, &coins).gap_weighted);
    }

    #[test]
    fn damanik_is_no_conclusion() {
        let sites = crate::coins::factorial_barrier_sites(5);
        let mut all = vec![0];
        all.extend(&sites);
        let seq = SparseSubsequence::explicit(&all).unwrap();
        let coins = CoinSequence::damanik(crate::coins::DamanikSpec { eta: 0.5, sites }).unwrap();
        let g = gap_weighted_bound(&seq, &coins);
        assert!(!g.conclusive);
        assert!(g.plus.unwrap().last_quartile > 1e5);
        assert_eq!(classify(&seq, &coins).case, None);
    }

    #[test]
    fn tail_shift_sweep_decreases_for_fast_decay() {
        let seq = SparseSubsequence::geometric(2, 40).unwrap();
        let coins = overlay(&seq, Decay::Custom(std::sync::Arc::new(|_, j: i64| {
            if j == 0 { 1.0 } else { (1.0 / (j.unsigned_abs() as f64).powf(1.5)).min(1.0) }
        })));
        let sweep = tail_shift_sweep(&seq, &coins, 1.0, 0..=20);
        assert!(sweep.windows(2).all(|w| w[1].1 <= w[0].1));
        assert!(sweep.last().unwrap().1 < 1e-2);
    }

    fn arb_seq() -> impl Strategy<Value = SparseSubsequence> {
        (prop::collection::vec(1i64..9, 9..14), prop::collection::vec(1i64..9, 9..14)).prop_map(|(gp, gn)| {
            let mut sites = vec![0i64];
            let mut s = 0;
            for g in gp {
                s += g;
                sites.push(s);
            }
            let mut s = 0;
            for g in gn {
                s -= g;
                sites.insert(0, s);
            }
            SparseSubsequence::explicit(&sites).unwrap()
        })
    }

    proptest! {
        #[test]
        fn closed_forms_match_interface_sums(
            seq in arb_seq(),
            a in prop::collection::vec(0.0f64..1.0, 40),
            n in 0usize..5,
        ) {
            let table = seq.sites().iter().zip(a.iter().cycle())
                .map(|(&s, &v)| (s, LocalCoin::from_abs(v).unwrap()))
                .collect();
            let coins = CoinSequence::table(table, LocalCoin::hadamard());
            for kind in [ModifiedKind::Tilde, ModifiedKind::Hat] {
                let f = commutator_norm_formula(&seq, &coins, kind, n);
                let g = commutator_norm_by_interfaces(&seq, &coins, kind, n);
                prop_assert!((f - g).abs() <= 1e-12 * (1.0 + g), "{kind:?} N={n}: {f} vs {g}");
            }
        }

        #[test]
        fn best_is_minimum(seq in arb_seq(), v in 0.0f64..1.0) {
            let coins = CoinSequence::table(
                seq.sites().iter().map(|&s| (s, LocalCoin::from_abs(v).unwrap())).collect(),
                LocalCoin::hadamard(),
            );
            let r = theorem_general_bound(&[BoundInput { k: 2, seq: &seq, coins: &coins, q: Some(0.5) }], 0..=6).unwrap();
            prop_assert!(r.rows.iter().all(|row| r.best.value <= row.value && row.value >= 0.0));
        }
    }
}

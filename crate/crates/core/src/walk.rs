//! One step of `W = S₊C₁S₋C₂` on compactly supported states, the equivalent
//! CMV factorization `L·M`, and long-time evolution.

use num_complex::Complex64;

use crate::coins::{CoinSequence, LocalCoin};
use crate::lattice::{CmvVector, SiteIndex, WalkState};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Exact zeros are trimmed from the window this often.
pub const TRIM_INTERVAL: usize = 64;

/// The split-step walk defined by two coin sequences.
#[derive(Debug, Clone)]
pub struct SplitStepWalk {
    pub c1: CoinSequence,
    pub c2: CoinSequence,
}

impl SplitStepWalk {
    pub fn new(c1: CoinSequence, c2: CoinSequence) -> Self {
        SplitStepWalk { c1, c2 }
    }

    /// Same coin sequence in both slots.
    pub fn symmetric(c: CoinSequence) -> Self {
        SplitStepWalk { c1: c.clone(), c2: c }
    }

    pub fn cmv_factors(&self) -> CmvFactors {
        CmvFactors {
            c1: self.c1.clone(),
            c2: self.c2.clone(),
        }
    }
}

/// Coins materialized over a site range.
#[derive(Debug, Clone)]
struct CoinCache {
    lo: SiteIndex,
    c1: Vec<LocalCoin>,
    c2: Vec<LocalCoin>,
}

impl CoinCache {
    fn new(walk: &SplitStepWalk, lo: SiteIndex, hi: SiteIndex) -> Self {
        CoinCache {
            lo,
            c1: walk.c1.materialize(lo, hi),
            c2: walk.c2.materialize(lo, hi),
        }
    }

    fn hi(&self) -> SiteIndex {
        self.lo + self.c1.len() as i64 - 1
    }

    fn covers(&self, lo: SiteIndex, hi: SiteIndex) -> bool {
        lo >= self.lo && hi <= self.hi()
    }
}

/// Applies one step in place. The window grows by one site on each side.
///
/// With `u = C₂ψ`, the output at site `j` is
/// `(v⁺, v⁻) = C₁(j) (u⁺(j), u⁻(j+1))` with `v⁻` kept at `j` and `v⁺` moved
/// to `j + 1`. The sweep carries `v⁺` forward and reads `u(j+1)` before its
/// slot is overwritten, so only O(1) scratch is used.
fn step_in_place(state: &mut WalkState, cache: &CoinCache) {
    if state.is_empty() {
        return;
    }
    state.extend_to(state.lo() - 1, state.hi() + 1);
    let lo = state.lo();
    let n = state.num_sites();
    debug_assert!(cache.covers(lo, lo + n as i64 - 1));
    let off = (lo - cache.lo) as usize;
    let c1 = &cache.c1[off..off + n];
    let c2 = &cache.c2[off..off + n];
    let amps = state.amplitudes_mut();

    // u at slot 0 (padding, so zero)
    let mut cur = c2[0].apply(amps[0], amps[1]);
    let mut carry = ZERO;
    for i in 0..n {
        let next = if i + 1 < n {
            c2[i + 1].apply(amps[2 * i + 2], amps[2 * i + 3])
        } else {
            (ZERO, ZERO)
        };
        let (vp, vm) = c1[i].apply(cur.0, next.1);
        amps[2 * i] = carry;
        amps[2 * i + 1] = vm;
        carry = vp;
        cur = next;
    }
    // The final carry came from a padding slot and is zero.
    debug_assert!(carry == ZERO);
}

/// One application of `W`; the result window is `[lo − 1, hi + 1]`.
pub fn step_split(walk: &SplitStepWalk, state: &WalkState) -> WalkState {
    let mut out = state.clone();
    if out.is_empty() {
        return out;
    }
    let cache = CoinCache::new(walk, state.lo() - 1, state.hi() + 1);
    step_in_place(&mut out, &cache);
    out
}

/// CMV factors: `M = ⊕ Θ₂(n)` on `{2n−1, 2n}` and `L = ⊕ Θ₁(n)` on
/// `{2n, 2n+1}`, with `Θ_k(n) = σ_x C_k(n)`.
#[derive(Debug, Clone)]
pub struct CmvFactors {
    pub c1: CoinSequence,
    pub c2: CoinSequence,
}

impl CmvFactors {
    /// Applies `M` in place; the vector is first padded to whole `M` blocks.
    pub fn apply_m(&self, seq: &mut CmvVector) {
        if seq.is_empty() {
            return;
        }
        let lo = if seq.start().rem_euclid(2) == 1 { seq.start() } else { seq.start() - 1 };
        let hi = if seq.end().rem_euclid(2) == 0 { seq.end() } else { seq.end() + 1 };
        seq.extend_to(lo, hi);
        let mut k = lo;
        while k < hi {
            let n = (k + 1) / 2;
            let coin = self.c2.coin_at(n);
            let (x, y) = (seq.get(k), seq.get(k + 1));
            let (nx, ny) = coin.apply_cmv(x, y);
            *seq.slot_mut(k) = nx;
            *seq.slot_mut(k + 1) = ny;
            k += 2;
        }
    }

    /// Applies `L` in place; the vector is first padded to whole `L` blocks.
    pub fn apply_l(&self, seq: &mut CmvVector) {
        if seq.is_empty() {
            return;
        }
        let lo = if seq.start().rem_euclid(2) == 0 { seq.start() } else { seq.start() - 1 };
        let hi = if seq.end().rem_euclid(2) == 1 { seq.end() } else { seq.end() + 1 };
        seq.extend_to(lo, hi);
        let mut k = lo;
        while k < hi {
            let n = k.div_euclid(2);
            let coin = self.c1.coin_at(n);
            let (x, y) = (seq.get(k), seq.get(k + 1));
            let (nx, ny) = coin.apply_cmv(x, y);
            *seq.slot_mut(k) = nx;
            *seq.slot_mut(k + 1) = ny;
            k += 2;
        }
    }
}

/// One application of `L·M` (M first).
pub fn step_cmv(factors: &CmvFactors, seq: &CmvVector) -> CmvVector {
    let mut out = seq.clone();
    factors.apply_m(&mut out);
    factors.apply_l(&mut out);
    out
}

/// Outcome of [`evolve`].
#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: WalkState,
    pub steps: usize,
    /// `|‖W^t ψ‖² − ‖ψ‖²|`.
    pub norm_drift: f64,
}

/// Stepper that keeps its coin cache between calls.
#[derive(Debug, Clone)]
pub struct Evolver<'a> {
    walk: &'a SplitStepWalk,
    cache: Option<CoinCache>,
    state: WalkState,
    t: usize,
    initial_norm_sqr: f64,
}

impl<'a> Evolver<'a> {
    pub fn new(walk: &'a SplitStepWalk, state: WalkState) -> Self {
        let initial_norm_sqr = state.norm_sqr();
        Evolver {
            walk,
            cache: None,
            state,
            t: 0,
            initial_norm_sqr,
        }
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn state(&self) -> &WalkState {
        &self.state
    }

    pub fn into_state(self) -> WalkState {
        self.state
    }

    pub fn norm_drift(&self) -> f64 {
        (self.state.norm_sqr() - self.initial_norm_sqr).abs()
    }

    /// Makes sure coins cover the next `ahead` steps.
    fn reserve(&mut self, ahead: usize) {
        if self.state.is_empty() {
            return;
        }
        let need_lo = self.state.lo() - 1;
        let need_hi = self.state.hi() + 1;
        if self.cache.as_ref().is_some_and(|c| c.covers(need_lo, need_hi)) {
            return;
        }
        let pad = ahead.max(64) as i64 + 1;
        self.cache = Some(CoinCache::new(
            self.walk,
            self.state.lo() - pad,
            self.state.hi() + pad,
        ));
    }

    pub fn step(&mut self) {
        self.advance(1);
    }

    /// Runs `steps` further steps.
    pub fn advance(&mut self, steps: usize) {
        for i in 0..steps {
            self.reserve(steps - i);
            if let Some(cache) = &self.cache {
                step_in_place(&mut self.state, cache);
            }
            self.t += 1;
            if self.t.is_multiple_of(TRIM_INTERVAL) {
                self.state.trim_zeros();
            }
        }
    }

    /// Advances to absolute time `t` (no-op if already past it).
    pub fn advance_to(&mut self, t: usize) {
        if t > self.t {
            self.advance(t - self.t);
        }
    }
}

/// `W^t ψ`, with norm drift.
pub fn evolve(walk: &SplitStepWalk, state: &WalkState, t: usize) -> Evolution {
    let mut ev = Evolver::new(walk, state.clone());
    ev.advance(t);
    Evolution {
        norm_drift: ev.norm_drift(),
        steps: t,
        state: ev.into_state(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coins::{Decay, SparseOverlaySpec};
    use crate::lattice::{CmvIndex, Spin};
    use crate::subsequence::SparseSubsequence;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn reflector_at(site: SiteIndex) -> CoinSequence {
        CoinSequence::table([(site, LocalCoin::reflector())].into_iter().collect(), LocalCoin::identity())
    }

    fn shift_only() -> SplitStepWalk {
        SplitStepWalk::symmetric(CoinSequence::identity())
    }

    #[test]
    fn mirror_identities() {
        let l = 4;
        // C₁ = 1 reduces W to S C.
        let sc = SplitStepWalk::new(CoinSequence::identity(), reflector_at(l));
        let out = step_split(&sc, &WalkState::basis(l, Spin::Plus));
        let expect = {
            let mut s = WalkState::zero();
            s.set(l - 1, Spin::Minus, c(-1.0, 0.0));
            s
        };
        assert_eq!(out.max_abs_diff(&expect), 0.0);

        let shifted = step_split(&shift_only(), &WalkState::basis(l - 1, Spin::Plus));
        let out = step_split(&sc, &shifted);
        assert_eq!(out.max_abs_diff(&expect), 0.0);
    }

    #[test]
    fn identity_coins_transmit() {
        let w = shift_only();
        let out = step_split(&w, &WalkState::basis(0, Spin::Plus));
        assert_eq!(out.max_abs_diff(&WalkState::basis(1, Spin::Plus)), 0.0);
        let out = evolve(&w, &WalkState::basis(0, Spin::Minus), 3).state;
        assert_eq!(out.max_abs_diff(&WalkState::basis(-3, Spin::Minus)), 0.0);
        // CMV index moves by ±2 per step.
        let mut seq = CmvVector::unit(CmvIndex(-1));
        for _ in 0..3 {
            seq = step_cmv(&w.cmv_factors(), &seq);
        }
        assert_eq!(seq.get(5), c(1.0, 0.0));
    }

    #[test]
    fn hadamard_two_steps_by_hand() {
        // C = H/√2 · [[1, 1], [−1, 1]] at every site.
        let w = SplitStepWalk::symmetric(CoinSequence::hadamard());
        let out = evolve(&w, &WalkState::basis(0, Spin::Plus), 2).state;
        // Brute-force expansion of the four maps, twice.
        let h = FRAC_1_SQRT_2;
        let mut psi = std::collections::BTreeMap::new();
        psi.insert((0i64, 0usize), c(1.0, 0.0));
        for _ in 0..2 {
            let coin = |p: &std::collections::BTreeMap<(i64, usize), Complex64>| {
                let mut o = std::collections::BTreeMap::new();
                for (&(j, s), &z) in p {
                    let (tp, tm) = if s == 0 { (h, -h) } else { (h, h) };
                    *o.entry((j, 0)).or_insert(c(0.0, 0.0)) += z * tp;
                    *o.entry((j, 1)).or_insert(c(0.0, 0.0)) += z * tm;
                }
                o
            };
            let shift = |p: &std::collections::BTreeMap<(i64, usize), Complex64>, spin: usize, d: i64| {
                p.iter()
                    .map(|(&(j, s), &z)| if s == spin { ((j + d, s), z) } else { ((j, s), z) })
                    .collect::<std::collections::BTreeMap<_, _>>()
            };
            psi = shift(&coin(&shift(&coin(&psi), 1, -1)), 0, 1);
        }
        for (&(j, s), &z) in &psi {
            let spin = if s == 0 { Spin::Plus } else { Spin::Minus };
            assert!((out.get(j, spin) - z).norm() < 1e-15, "site {j} spin {s}");
        }
        assert!((out.norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_steps_is_identity() {
        let w = SplitStepWalk::symmetric(CoinSequence::hadamard());
        let s = WalkState::basis(3, Spin::Minus);
        assert_eq!(evolve(&w, &s, 0).state, s);
    }

    #[test]
    fn reflector_cavity_traps() {
        let seq = SparseSubsequence::arithmetic(5, 50).unwrap();
        let coins = CoinSequence::sparse_overlay(SparseOverlaySpec {
            base: LocalCoin::hadamard(),
            sites: seq,
            decay: Decay::Zero,
        })
        .unwrap();
        let w = SplitStepWalk::symmetric(coins);
        // ℋ_0 = span{δ_0 … δ_9} on the CMV side.
        let amps: Vec<_> = (0..10).map(|i| c(1.0 + i as f64, -(i as f64) * 0.5)).collect();
        let psi = WalkState::from_cmv(&CmvVector::new(0, amps)).normalized().unwrap();
        let mut ev = Evolver::new(&w, psi);
        for _ in 0..1000 {
            ev.step();
            let cmv = ev.state().to_cmv();
            let leak: f64 = cmv.iter().filter(|&(n, _)| !(0..=9).contains(&n)).map(|(_, z)| z.norm()).sum();
            assert_eq!(leak, 0.0);
        }
        assert_eq!(ev.state().mass_outside(0, 5), 0.0);
    }

    fn arb_coin() -> impl Strategy<Value = LocalCoin> {
        (0.0f64..1.0, -3.2f64..3.2, -3.2f64..3.2).prop_map(|(r, pa, pb)| {
            let a = Complex64::from_polar(r, pa);
            let b = Complex64::from_polar((1.0 - r * r).sqrt(), pb);
            LocalCoin::new(a, b).unwrap()
        })
    }

    proptest! {
        #[test]
        fn split_and_cmv_agree(
            coins1 in prop::collection::vec(arb_coin(), 30),
            coins2 in prop::collection::vec(arb_coin(), 30),
            amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..20),
            lo in -8i64..0,
        ) {
            let t1 = coins1.into_iter().enumerate().map(|(i, c)| (i as i64 - 15, c)).collect();
            let t2 = coins2.into_iter().enumerate().map(|(i, c)| (i as i64 - 15, c)).collect();
            let w = SplitStepWalk::new(
                CoinSequence::table(t1, LocalCoin::hadamard()),
                CoinSequence::table(t2, LocalCoin::hadamard()),
            );
            let pairs: Vec<_> = amps.chunks(2).map(|p| (c(p[0].0, p[0].1), c(p[p.len() - 1].1, p[0].0))).collect();
            let Ok(mut s) = WalkState::from_pairs(lo, &pairs).normalized() else { return Ok(()); };
            let f = w.cmv_factors();
            for _ in 0..12 {
                let a = step_split(&w, &s);
                let b = WalkState::from_cmv(&step_cmv(&f, &s.to_cmv()));
                prop_assert!(a.max_abs_diff(&b) <= 1e-12);
                prop_assert!((a.norm_sqr() - 1.0).abs() <= 1e-12);
                s = a;
            }
        }

        #[test]
        fn speed_limit(t in 0usize..40, lo in -5i64..5, len in 1i64..6) {
            let w = SplitStepWalk::symmetric(CoinSequence::hadamard());
            let s = WalkState::from_fn(lo, lo + len - 1, |j| (c(1.0, j as f64), c(0.5, 0.0))).normalized().unwrap();
            let out = evolve(&w, &s, t).state;
            if let Some((a, b)) = out.support() {
                prop_assert!(a >= lo - t as i64 && b <= lo + len - 1 + t as i64);
            }
        }
    }
}

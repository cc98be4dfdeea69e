//! Cross-oracle self-checks behind `qwalk-lab validate`.
//!
//! The stepping routine and the commutator formula are injectable so the
//! suite can be pointed at deliberately broken implementations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, ModifiedKind};
use crate::coins::{CoinSequence, Decay, LocalCoin, SparseOverlaySpec};
use crate::dense::{self, CommutatorFormula};
use crate::lattice::{Spin, WalkState};
use crate::observables::PositionDistribution;
use crate::subsequence::SparseSubsequence;
use crate::walk::{step_cmv, step_split, SplitStepWalk};

/// One application of `W`.
pub type StepFn = fn(&SplitStepWalk, &WalkState) -> WalkState;

/// Implementations under test.
#[derive(Debug, Clone, Copy)]
pub struct Hooks {
    pub step: StepFn,
    pub formula: CommutatorFormula,
}

impl Default for Hooks {
    fn default() -> Self {
        Hooks { step: step_split, formula: bounds::commutator_norm_formula }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Seed that reproduces the check (0 for deterministic ones).
    pub seed: u64,
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, seed: u64, worst: f64, tolerance: f64, detail: String) -> Self {
        CheckResult { name: name.into(), passed: worst <= tolerance, seed, worst, tolerance, detail }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {} worst={:.3e} tol={:.1e} seed={} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.tolerance,
            self.seed,
            self.detail
        )
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_state(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> WalkState {
    let mut g = || c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    WalkState::from_fn(lo, hi, |_| (g(), g())).normalized().expect("nonzero random state")
}

/// Single-site maps with `C₁ = 1`: `W = S C₂` moves `δ_l⁺` to `−δ_{l−1}⁻`
/// at a reflector and transmits freely through identity coins.
pub fn mirror_identity(hooks: &Hooks) -> CheckResult {
    let l = 4;
    let reflect = SplitStepWalk::new(
        CoinSequence::identity(),
        CoinSequence::table([(l, LocalCoin::reflector())].into_iter().collect(), LocalCoin::identity()),
    );
    let free = SplitStepWalk::new(CoinSequence::identity(), CoinSequence::identity());
    let mut expect = WalkState::zero();
    expect.set(l - 1, Spin::Minus, c(-1.0, 0.0));
    let cases = [
        ((hooks.step)(&reflect, &WalkState::basis(l, Spin::Plus)), expect),
        ((hooks.step)(&free, &WalkState::basis(0, Spin::Plus)), WalkState::basis(1, Spin::Plus)),
        ((hooks.step)(&free, &WalkState::basis(0, Spin::Minus)), WalkState::basis(-1, Spin::Minus)),
    ];
    let worst = cases.iter().map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max);
    CheckResult::new("mirror-identity", 0, worst, 0.0, "reflector and free-transmission maps".into())
}

/// Split-step against the CMV factorization for random coins.
pub fn split_vs_cmv(hooks: &Hooks, seed: u64, steps: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = steps as i64 + 20;
    let walk = SplitStepWalk::new(
        dense::random_unitary_coins(rng.random(), -r, r),
        dense::random_unitary_coins(rng.random(), -r, r),
    );
    let factors = walk.cmv_factors();
    let mut psi = random_state(&mut rng, -4, 4);
    let mut seq = psi.to_cmv();
    let mut worst = 0.0f64;
    let mut drift = 0.0f64;
    for _ in 0..steps {
        psi = (hooks.step)(&walk, &psi);
        seq = step_cmv(&factors, &seq);
        worst = worst.max(psi.max_abs_diff(&WalkState::from_cmv(&seq)));
        drift = drift.max((psi.norm_sqr() - 1.0).abs());
    }
    let mut r = CheckResult::new(
        "split-vs-cmv",
        seed,
        worst,
        1e-12,
        format!("steps={steps} norm_drift={drift:.3e} (tol 1e-10)"),
    );
    r.passed &= drift <= 1e-10;
    r
}

/// Closed form against dense singular values for both surrogates and `N ≤ 3`.
pub fn commutator_formula(hooks: &Hooks, seed: u64) -> CheckResult {
    let seq = dense::random_subsequence(seed, 8, 6);
    let lo = seq.j(-(seq.horizon() as i64)) - 1;
    let hi = seq.j(seq.horizon() as i64) + 1;
    let coins = dense::random_unitary_coins(seed.wrapping_add(1), lo, hi);
    let other = dense::random_unitary_coins(seed.wrapping_add(2), lo, hi);
    let mut worst = 0.0f64;
    let mut offdiag = 0.0f64;
    let mut with_l = 0.0f64;
    let mut detail = String::new();
    for kind in [ModifiedKind::Tilde, ModifiedKind::Hat] {
        for n in 0..=3 {
            match dense::check_commutator(&seq, &coins, &other, kind, n, hooks.formula) {
                Ok(chk) => {
                    offdiag = offdiag.max(chk.offdiag);
                    with_l = with_l.max(chk.commutes_with_l);
                    if chk.diff >= worst {
                        worst = chk.diff;
                        detail = format!("worst at {kind:?} N={n}: formula={:.12} dense={:.12}", chk.formula, chk.dense);
                    }
                }
                Err(e) => return CheckResult::new("commutator-formula", seed, f64::INFINITY, 1e-10, e.to_string()),
            }
        }
    }
    let mut r = CheckResult::new(
        "commutator-formula",
        seed,
        worst,
        1e-10,
        format!("{detail} offdiag={offdiag:.1e} (tol 1e-12) [D,L]={with_l:.1e}"),
    );
    r.passed &= offdiag <= 1e-12 && with_l == 0.0;
    r
}

/// `P(|X| ≥ vt) ≤ E[X²]/(vt)²` on distributions of a random-coin walk.
pub fn chebyshev(hooks: &Hooks, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let walk = SplitStepWalk::new(
        dense::random_unitary_coins(rng.random(), -300, 300),
        CoinSequence::hadamard(),
    );
    let mut psi = random_state(&mut rng, -2, 2);
    let mut violations = 0usize;
    let mut checked = 0usize;
    for t in 1..=200 {
        psi = (hooks.step)(&walk, &psi);
        if t % 20 == 0 {
            let d = PositionDistribution::from_state(&psi, t);
            for v in [0.1, 0.5, 1.0] {
                checked += 1;
                if !d.chebyshev_holds(v).unwrap_or(false) {
                    violations += 1;
                }
            }
        }
    }
    CheckResult::new("chebyshev", seed, violations as f64, 0.0, format!("{checked} tail checks"))
}

/// Perfect reflectors at `5m` trap a state started in the cavity `[0, 5]`.
pub fn reflector_invariance(hooks: &Hooks, seed: u64, steps: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seq = SparseSubsequence::arithmetic(5, 16).expect("valid arithmetic subsequence");
    let coins = CoinSequence::sparse_overlay(SparseOverlaySpec {
        base: LocalCoin::hadamard(),
        sites: seq,
        decay: Decay::Zero,
    })
    .expect("valid overlay");
    let walk = SplitStepWalk::symmetric(coins);
    let mut psi = random_state(&mut rng, 0, 5);
    // ℋ_0 spans δ_0⁻ … δ_5⁺.
    psi.set(0, Spin::Plus, c(0.0, 0.0));
    psi.set(5, Spin::Minus, c(0.0, 0.0));
    let mut psi = psi.normalized().expect("nonzero interior state");
    let mut worst = 0.0f64;
    for _ in 0..steps {
        psi = (hooks.step)(&walk, &psi);
        worst = worst.max(psi.mass_outside(0, 5));
    }
    CheckResult::new("reflector-invariance", seed, worst, 1e-28, format!("steps={steps}"))
}

/// Full suite with fixed reproduction seeds.
pub fn run_all(hooks: &Hooks) -> Vec<CheckResult> {
    let mut out = vec![mirror_identity(hooks)];
    out.extend((0..3).map(|s| split_vs_cmv(hooks, 11 + s, 300)));
    out.extend((0..5).map(|s| commutator_formula(hooks, 101 + s)));
    out.push(chebyshev(hooks, 7));
    out.push(reflector_invariance(hooks, 5, 1000));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_real_implementation() {
        for r in run_all(&Hooks::default()) {
            assert!(r.passed, "{}", r.line());
        }
    }

    #[test]
    fn lines_are_prefixed() {
        let r = mirror_identity(&Hooks::default());
        assert!(r.line().starts_with("PASS mirror-identity"));
    }
}

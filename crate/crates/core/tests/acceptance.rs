//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances and horizons are fixed constants below.

use std::f64::consts::FRAC_1_SQRT_2;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use qwalk_lab::bounds::{self, BoundInput, ModifiedKind};
use qwalk_lab::coins::{CoinSequence, Decay, LocalCoin, SparseOverlaySpec};
use qwalk_lab::dense;
use qwalk_lab::lattice::{Spin, WalkState};
use qwalk_lab::observables::{self, localized_family, default_family, packet_family, PositionDistribution};
use qwalk_lab::random::{self, RandomCoins, TailDistribution};
use qwalk_lab::walk::{step_cmv, Evolver, SplitStepWalk};
use qwalk_lab::SparseSubsequence;

struct Outcome {
    id: u32,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_state(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> WalkState {
    let mut g = || c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    WalkState::from_fn(lo, hi, |_| (g(), g())).normalized().unwrap()
}

fn overlay(seq: &SparseSubsequence, decay: Decay) -> CoinSequence {
    CoinSequence::sparse_overlay(SparseOverlaySpec { base: LocalCoin::hadamard(), sites: seq.clone(), decay }).unwrap()
}

// 1. Norm drift ≤ 1e-10 and split-step vs CMV ≤ 1e-12 per step, 50 configs,
//    t = 1000, within 30 s.
fn unitarity_and_equivalence() -> Outcome {
    const CONFIGS: u64 = 50;
    const T: usize = 1000;
    let start = Instant::now();
    let per: Vec<(f64, f64)> = (0..CONFIGS)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let r = T as i64 + 16;
            let walk = SplitStepWalk::new(
                dense::random_unitary_coins(rng.random(), -r, r),
                dense::random_unitary_coins(rng.random(), -r, r),
            );
            let factors = walk.cmv_factors();
            let psi = random_state(&mut rng, -3, 3);
            let mut seq = psi.to_cmv();
            let mut ev = Evolver::new(&walk, psi);
            let mut diff = 0.0f64;
            for _ in 0..T {
                ev.step();
                seq = step_cmv(&factors, &seq);
                diff = diff.max(ev.state().max_abs_diff(&WalkState::from_cmv(&seq)));
            }
            let drift = (ev.state().norm_sqr() - 1.0).abs().max(ev.norm_drift());
            (drift, diff)
        })
        .collect();
    let elapsed = start.elapsed();
    let drift = per.iter().map(|p| p.0).fold(0.0, f64::max);
    let diff = per.iter().map(|p| p.1).fold(0.0, f64::max);
    Outcome {
        id: 1,
        name: "unitarity & split/CMV equivalence",
        passed: drift <= 1e-10 && diff <= 1e-12 && elapsed <= Duration::from_secs(30),
        detail: format!(
            "drift {drift:.2e} (≤1e-10), amp diff {diff:.2e} (≤1e-12), {:.1}s (≤30s)",
            elapsed.as_secs_f64()
        ),
    }
}

// 2. Reflectors at 5m on both coins: amplitude outside ℋ_0 ≤ 1e-14 for
//    t ≤ 5000 and v̂(t) ≤ 5/t.
fn reflector_trapping() -> Outcome {
    const T: usize = 5000;
    let seq = SparseSubsequence::arithmetic(5, 64).unwrap();
    let coins = overlay(&seq, Decay::Zero);
    let walk = SplitStepWalk::symmetric(coins);
    let mut states: Vec<WalkState> = (0..12)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(2000 + s);
            random_state(&mut rng, 0, 5)
        })
        .collect();
    states.push(WalkState::basis(0, Spin::Minus));
    states.push(WalkState::basis(5, Spin::Plus));
    states.push(WalkState::basis(3, Spin::Minus));
    let per: Vec<(f64, f64)> = states
        .into_par_iter()
        .map(|mut psi| {
            // ℋ_0 = span{δ_0⁻, δ_1^±, …, δ_4^±, δ_5⁺}
            psi.set(0, Spin::Plus, c(0.0, 0.0));
            psi.set(5, Spin::Minus, c(0.0, 0.0));
            let psi = psi.normalized().unwrap();
            let mut ev = Evolver::new(&walk, psi);
            let mut outside = 0.0f64;
            let mut excess = f64::NEG_INFINITY;
            for t in 1..=T {
                ev.step();
                let s = ev.state();
                for (j, p, m) in s.sites() {
                    let out_p = if (1..=5).contains(&j) { 0.0 } else { p.norm() };
                    let out_m = if (0..=4).contains(&j) { 0.0 } else { m.norm() };
                    outside = outside.max(out_p).max(out_m);
                }
                excess = excess.max(observables::vhat(s, t) - 5.0 / t as f64);
            }
            (outside, excess)
        })
        .collect();
    let outside = per.iter().map(|p| p.0).fold(0.0, f64::max);
    let excess = per.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Outcome {
        id: 2,
        name: "perfect-reflector trapping",
        passed: outside <= 1e-14 && excess <= 0.0,
        detail: format!("max outside amplitude {outside:.2e} (≤1e-14), max v̂(t) − 5/t {excess:.2e} (≤0)"),
    }
}

// 3. Homogeneous walks: max v̂ over t ∈ [100, 2000] ≤ |a| + 5e-3; boosted
//    packets reach ≥ 0.9|a| at t = 2000.
fn apriori_soundness() -> Outcome {
    let grid = observables::linear_grid(100, 2000);
    let mut passed = true;
    let mut detail = Vec::new();
    for a in [0.3, FRAC_1_SQRT_2, 0.95] {
        let walk = SplitStepWalk::symmetric(CoinSequence::homogeneous(c(a, 0.0)).unwrap());
        let est = observables::velocity_proxy(&walk, &default_family(), &grid, 0.5).unwrap();
        let upper = est.max_vhat();
        let packets = packet_family().iter().map(|s| s.id()).collect::<Vec<_>>();
        let lower = est
            .samples
            .iter()
            .filter(|s| s.t == 2000 && packets.contains(&s.psi_id))
            .map(|s| s.vhat)
            .fold(0.0, f64::max);
        passed &= upper <= a + 5e-3 && lower >= 0.9 * a;
        detail.push(format!("|a|={a:.4}: max {upper:.4} (≤{:.4}), packets {lower:.4} (≥{:.4})", a + 5e-3, 0.9 * a));
    }
    Outcome { id: 3, name: "a priori bound soundness", passed, detail: detail.join("; ") }
}

/// Explicit subsequence whose commutator window has exactly `2·span + 2`
/// CMV indices, with `per_side` interior gaps on each side.
fn subsequence_with_span(rng: &mut ChaCha8Rng, per_side: usize, span: i64) -> SparseSubsequence {
    // Random composition of `span` into 2·per_side positive gaps.
    let parts = 2 * per_side;
    let mut cuts: Vec<i64> = Vec::new();
    while cuts.len() < parts - 1 {
        let x = rng.random_range(1..span);
        if !cuts.contains(&x) {
            cuts.push(x);
        }
    }
    cuts.sort_unstable();
    let mut pts = vec![0];
    pts.extend(cuts);
    pts.push(span);
    // Re-center so the per_side-th point is j_0 = 0, then add one site past
    // each end.
    let shift = pts[per_side];
    let mut sites: Vec<i64> = pts.iter().map(|p| p - shift).collect();
    sites.insert(0, sites[0] - rng.random_range(1..=6));
    let last = *sites.last().unwrap();
    sites.push(last + rng.random_range(1..=6));
    SparseSubsequence::explicit(&sites).unwrap()
}

// 4. Commutator formula vs dense oracle on 256-index windows: diff ≤ 1e-10,
//    off-diagonal ≤ 1e-12, N ∈ {0, 1, 2, 3}, both surrogates.
fn commutator_vs_dense() -> Outcome {
    const SEEDS: u64 = 12;
    let per: Vec<(f64, f64, usize, usize)> = (0..SEEDS)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(4000 + s);
            let per_side = rng.random_range(3..=8);
            let seq = subsequence_with_span(&mut rng, per_side, 127);
            let lo = seq.j(-(seq.horizon() as i64)) - 1;
            let hi = seq.j(seq.horizon() as i64) + 1;
            let active = dense::random_unitary_coins(rng.random(), lo, hi);
            let other = dense::random_unitary_coins(rng.random(), lo, hi);
            let mut diff = 0.0f64;
            let mut off = 0.0f64;
            let mut len = 0;
            let mut interfaces = usize::MAX;
            for kind in [ModifiedKind::Tilde, ModifiedKind::Hat] {
                for n in 0..=3 {
                    let chk =
                        dense::check_commutator(&seq, &active, &other, kind, n, bounds::commutator_norm_formula).unwrap();
                    diff = diff.max(chk.diff);
                    off = off.max(chk.offdiag);
                    len = chk.window_len;
                    interfaces = interfaces.min(chk.interfaces);
                }
            }
            (diff, off, len, interfaces)
        })
        .collect();
    let diff = per.iter().map(|p| p.0).fold(0.0, f64::max);
    let off = per.iter().map(|p| p.1).fold(0.0, f64::max);
    let lens_ok = per.iter().all(|p| p.2 == 256 && p.3 >= 6);
    Outcome {
        id: 4,
        name: "commutator formula vs dense oracle",
        passed: diff <= 1e-10 && off <= 1e-12 && lens_ok,
        detail: format!(
            "{SEEDS} windows of 256 (all 256 with ≥6 interfaces: {lens_ok}), max diff {diff:.2e} (≤1e-10), off-diagonal {off:.2e} (≤1e-12)"
        ),
    }
}

// 5. j_m = 5m, |a(j_m)| = 1/(1+|m|): best bound at horizon 10⁴ ≤ 0.05 and
//    v̂(2000) ≤ bound + 0.02.
fn case_one_trend() -> Outcome {
    const H: usize = 10_000;
    let seq = SparseSubsequence::arithmetic(5, H).unwrap();
    let coins = overlay(&seq, Decay::InverseIndex { scale: 1.0 });
    let inputs = [1u8, 2].map(|k| BoundInput { k, seq: &seq, coins: &coins, q: None });
    let report = bounds::theorem_general_bound(&inputs, 0..=H / 2).unwrap();
    let bound = report.best.value;
    let walk = SplitStepWalk::symmetric(coins);
    let v = observables::max_vhat_at(&walk, &localized_family(), 2000).unwrap();
    let packets = observables::max_vhat_at(&walk, &packet_family(), 2000).unwrap();
    Outcome {
        id: 5,
        name: "zero-velocity trend, uniform gaps",
        passed: bound <= 0.05 && v <= bound + 0.02,
        detail: format!(
            "best bound {bound:.4e} at N={} (≤0.05, q certified: {}), v̂(2000) {v:.4} (≤{:.4}); packet family v̂(2000) {packets:.4} (diagnostic)",
            report.best.n,
            report.certified_q,
            bound + 0.02
        ),
    }
}

// 6. j_m = sign(m)·m², |a(j_m)| = 1/(1+j_m²): gap-weighted estimate ≤ 0.05
//    at horizon 300 and v̂(2000) ≤ 0.1.
fn case_three_instance() -> Outcome {
    let seq = SparseSubsequence::power(2, 300).unwrap();
    let coins = overlay(&seq, Decay::InverseSiteSquare);
    let gw = bounds::gap_weighted_bound(&seq, &coins);
    let walk = SplitStepWalk::symmetric(coins.clone());
    let v = observables::max_vhat_at(&walk, &default_family(), 2000).unwrap();
    let case = bounds::classify(&seq, &coins);
    Outcome {
        id: 6,
        name: "gap-weighted instance",
        passed: gw.value <= 0.05 && v <= 0.1,
        detail: format!("gap-weighted {:.3e} (≤0.05, {}), v̂(2000) {v:.4} (≤0.1), case {:?}", gw.value, gw.note, case.case),
    }
}

// 7. c_N = 1 − (1+q)^{−(N+1)} to 1e-15, q = 0 ⇒ 0.
fn relative_bound_formula() -> Outcome {
    let mut worst = 0.0f64;
    let mut zero_ok = true;
    for n in 0..=40usize {
        zero_ok &= bounds::relative_bound_constant(0.0, n) == 0.0;
        for q in [1e-3, 0.1, 0.5, 1.0, 2.0, 7.5] {
            // Repeated division, independent of powi.
            let mut inv = 1.0f64;
            for _ in 0..=n {
                inv /= 1.0 + q;
            }
            worst = worst.max((bounds::relative_bound_constant(q, n) - (1.0 - inv)).abs());
        }
    }
    Outcome {
        id: 7,
        name: "relative-bound constant",
        passed: worst <= 1e-15 && zero_ok,
        detail: format!("max deviation {worst:.2e} (≤1e-15), q=0 gives 0: {zero_ok}"),
    }
}

// 8. α = 1/2: CDF dominance, good-index counts ≈ 2√n, envelope violations
//    ≤ 3 per side and seed; 100 seeds at n_max = 10⁵ within 2 min.
fn random_suite_sqrt() -> Outcome {
    const SEEDS: u64 = 100;
    const N_MAX: usize = 100_000;
    let start = Instant::now();
    let dist = TailDistribution::power_law(0.5).unwrap();
    let xs = [0.01, 0.05, 0.1];
    let ns = [1_000i64, 10_000, 100_000];
    struct PerSeed {
        cdf_ok: bool,
        counts: [usize; 3],
        worst_violations: usize,
    }
    let per: Vec<PerSeed> = (0..SEEDS)
        .into_par_iter()
        .map(|seed| {
            let coins = RandomCoins::new(dist.clone(), seed, N_MAX);
            let cdf_ok = xs.iter().all(|&x| random::empirical_cdf(&coins, x) >= 0.95 * x.sqrt());
            let seq = CoinSequence::random(coins);
            let scan = random::extract_good_from_coins(&seq, N_MAX);
            let counts = ns.map(|n| scan.count_up_to(true, n));
            let diag = random::block_gap_diagnostics(&scan, 0.5);
            let worst_violations = diag.positive.envelope_violations.len().max(diag.negative.envelope_violations.len());
            PerSeed { cdf_ok, counts, worst_violations }
        })
        .collect();
    let elapsed = start.elapsed();
    let cdf_ok = per.iter().all(|p| p.cdf_ok);
    let mut count_detail = Vec::new();
    let mut counts_ok = true;
    for (i, &n) in ns.iter().enumerate() {
        let med = random::median(per.iter().map(|p| p.counts[i] as f64).collect());
        let target = 2.0 * (n as f64).sqrt();
        counts_ok &= (med - target).abs() <= 0.25 * target;
        count_detail.push(format!("n={n}: {med} vs {target:.1}"));
    }
    let worst = per.iter().map(|p| p.worst_violations).max().unwrap_or(0);
    Outcome {
        id: 8,
        name: "random suite, α = 1/2",
        passed: cdf_ok && counts_ok && worst <= 3 && elapsed <= Duration::from_secs(120),
        detail: format!(
            "CDF ≥ 0.95√x on every seed: {cdf_ok}; median counts [{}] (±25%); worst envelope violations {worst} (≤3); {:.1}s (≤120s)",
            count_detail.join(", "),
            elapsed.as_secs_f64()
        ),
    }
}

// 9. α = 1: fraction of empty dyadic blocks n ∈ 5..=15 in [0.35, 0.65].
fn uniform_control() -> Outcome {
    const SEEDS: u64 = 100;
    const N_MAX: usize = 1 << 16;
    let dist = TailDistribution::uniform();
    let per: Vec<(usize, usize)> = (0..SEEDS)
        .into_par_iter()
        .map(|seed| {
            let coins = CoinSequence::random(RandomCoins::new(dist.clone(), seed, N_MAX));
            let scan = random::extract_good_from_coins(&coins, N_MAX);
            let diag = random::block_gap_diagnostics(&scan, 1.0);
            let mut empty = 0;
            let mut total = 0;
            for side in [&diag.positive, &diag.negative] {
                for &(n, e) in &side.dyadic_blocks {
                    if (5..=15).contains(&n) {
                        total += 1;
                        empty += e as usize;
                    }
                }
            }
            (empty, total)
        })
        .collect();
    let empty: usize = per.iter().map(|p| p.0).sum();
    let total: usize = per.iter().map(|p| p.1).sum();
    let frac = empty as f64 / total as f64;
    Outcome {
        id: 9,
        name: "uniform-coin control",
        passed: total == SEEDS as usize * 2 * 11 && (0.35..=0.65).contains(&frac),
        detail: format!("{empty}/{total} dyadic blocks empty = {frac:.4} (in [0.35, 0.65])"),
    }
}

// 10. Chebyshev tail bound on every computed distribution, v ∈ {0.1, 0.5, 1}.
fn chebyshev_identity() -> Outcome {
    let seq = SparseSubsequence::arithmetic(5, 200).unwrap();
    let walks = vec![
        SplitStepWalk::symmetric(CoinSequence::hadamard()),
        SplitStepWalk::symmetric(CoinSequence::homogeneous(c(0.95, 0.0)).unwrap()),
        SplitStepWalk::symmetric(overlay(&seq, Decay::InverseIndex { scale: 1.0 })),
        SplitStepWalk::new(dense::random_unitary_coins(10, -600, 600), dense::random_unitary_coins(11, -600, 600)),
    ];
    let per: Vec<(usize, usize)> = walks
        .par_iter()
        .flat_map(|w| default_family().into_par_iter().map(move |s| (w, s)))
        .map(|(w, s)| {
            let mut ev = Evolver::new(w, s.build().unwrap());
            let mut checked = 0;
            let mut bad = 0;
            for t in 1..=500 {
                ev.step();
                let d = PositionDistribution::from_state(ev.state(), t);
                for v in [0.1, 0.5, 1.0] {
                    checked += 1;
                    bad += (!d.chebyshev_holds(v).unwrap()) as usize;
                }
            }
            (checked, bad)
        })
        .collect();
    let checked: usize = per.iter().map(|p| p.0).sum();
    let bad: usize = per.iter().map(|p| p.1).sum();
    Outcome {
        id: 10,
        name: "Chebyshev identity",
        passed: bad == 0,
        detail: format!("{bad} violations in {checked} checks"),
    }
}

fn main() {
    // `cargo test -- --list` and filters: nothing to enumerate here.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [fn() -> Outcome; 10] = [
        unitarity_and_equivalence,
        reflector_trapping,
        apriori_soundness,
        commutator_vs_dense,
        case_one_trend,
        case_three_instance,
        relative_bound_formula,
        random_suite_sqrt,
        uniform_control,
        chebyshev_identity,
    ];
    let mut failed = 0;
    for f in criteria {
        let t = Instant::now();
        let o = f();
        println!(
            "{} criterion {:>2} {}: {} [{:.1}s]",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.detail,
            t.elapsed().as_secs_f64()
        );
        failed += !o.passed as usize;
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

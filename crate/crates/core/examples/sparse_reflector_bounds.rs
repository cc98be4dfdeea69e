//! Velocity bounds for coins that decay along a sparse subsequence.

use qwalk_lab::bounds::{
    classify, gap_stats, gap_weighted_bound, relative_bound_constant, theorem_general_bound, BoundInput,
};
use qwalk_lab::coins::{Decay, SparseOverlaySpec};
use qwalk_lab::observables::{localized_family, max_vhat_at};
use qwalk_lab::{CoinSequence, LocalCoin, SparseSubsequence, SplitStepWalk};

fn overlay(seq: &SparseSubsequence, decay: Decay) -> CoinSequence {
    CoinSequence::sparse_overlay(SparseOverlaySpec { base: LocalCoin::hadamard(), sites: seq.clone(), decay }).unwrap()
}

fn main() {
    println!("relative-bound constants c_N for q = 1: {:?}", (0..5).map(|n| relative_bound_constant(1.0, n)).collect::<Vec<_>>());

    // Bounded gaps: j_m = 5m, |a(j_m)| = 1/(1+|m|).
    for h in [100, 1000, 10_000] {
        let seq = SparseSubsequence::arithmetic(5, h).unwrap();
        let coins = overlay(&seq, Decay::InverseIndex { scale: 1.0 });
        let r = theorem_general_bound(&[BoundInput { k: 2, seq: &seq, coins: &coins, q: None }], 0..=h / 2).unwrap();
        println!("j_m = 5m, horizon {h:>5}: best bound {:.3e} at N = {}", r.best.value, r.best.n);
    }
    let seq = SparseSubsequence::arithmetic(5, 400).unwrap();
    let coins = overlay(&seq, Decay::InverseIndex { scale: 1.0 });
    let v = max_vhat_at(&SplitStepWalk::symmetric(coins.clone()), &localized_family(), 2000).unwrap();
    println!("  {}; measured v̂(2000) = {v:.4}", classify(&seq, &coins).label);

    // Quadratic gaps: j_m = ±m², |a(j_m)| = 1/(1+j_m²).
    let seq = SparseSubsequence::power(2, 300).unwrap();
    let coins = overlay(&seq, Decay::InverseSiteSquare);
    let stats = gap_stats(&seq).unwrap();
    let gw = gap_weighted_bound(&seq, &coins);
    println!(
        "j_m = ±m²: q ≈ {:.4} ({}), gap-weighted bound {:.3e} ({})",
        stats.q(),
        if stats.structural.is_some() { "structural" } else { "estimated" },
        gw.value,
        gw.note
    );

    // Geometric gaps keep q = 1, so (1+q)^{N+1} grows with N.
    let seq = SparseSubsequence::geometric(2, 40).unwrap();
    let coins = overlay(&seq, Decay::InverseSite { scale: 1.0 });
    let r = theorem_general_bound(&[BoundInput { k: 2, seq: &seq, coins: &coins, q: None }], 0..=6).unwrap();
    for row in &r.rows {
        println!("j_m = ±2^m, N = {}: (1+q)^(N+1)·max f = {:.3}", row.n, row.value);
    }
}

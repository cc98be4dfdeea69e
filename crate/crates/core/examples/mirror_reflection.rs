//! A perfect reflector at every fifth site traps a state in its cavity.

use num_complex::Complex64;
use qwalk_lab::coins::{Decay, SparseOverlaySpec};
use qwalk_lab::walk::{step_split, Evolver};
use qwalk_lab::{CoinSequence, LocalCoin, SparseSubsequence, Spin, SplitStepWalk, WalkState};

fn main() {
    // C₁ = 1 and a reflector at site 4: δ_4⁺ bounces to −δ_3⁻.
    let reflect = SplitStepWalk::new(
        CoinSequence::identity(),
        CoinSequence::table([(4, LocalCoin::reflector())].into_iter().collect(), LocalCoin::identity()),
    );
    let out = step_split(&reflect, &WalkState::basis(4, Spin::Plus));
    println!("W δ_4⁺ = {} δ_3⁻", out.get(3, Spin::Minus));

    let seq = SparseSubsequence::arithmetic(5, 32).unwrap();
    let coins = CoinSequence::sparse_overlay(SparseOverlaySpec {
        base: LocalCoin::hadamard(),
        sites: seq,
        decay: Decay::Zero,
    })
    .unwrap();
    let walk = SplitStepWalk::symmetric(coins);

    let mut psi = WalkState::zero();
    psi.set(2, Spin::Plus, Complex64::new(0.6, 0.0));
    psi.set(3, Spin::Minus, Complex64::new(0.0, 0.8));
    let mut ev = Evolver::new(&walk, psi);
    for t in [10, 100, 1000, 5000] {
        ev.advance_to(t);
        let s = ev.state();
        println!(
            "t = {t:>4}: mass outside [0, 5] = {:.1e}, support {:?}, norm drift {:.1e}",
            s.mass_outside(0, 5),
            s.support(),
            ev.norm_drift()
        );
    }
}

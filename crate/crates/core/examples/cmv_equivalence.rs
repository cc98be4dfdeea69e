//! The split-step walk is the CMV product L·M; both paths give the same state.

use qwalk_lab::coins::verblunsky_pairs;
use qwalk_lab::dense::random_unitary_coins;
use qwalk_lab::walk::{step_cmv, step_split};
use qwalk_lab::{CmvIndex, Spin, SplitStepWalk, WalkState};

fn main() {
    let c1 = random_unitary_coins(1, -300, 300);
    let c2 = random_unitary_coins(2, -300, 300);
    for n in 0..3 {
        let ((a_even, r_even), (a_odd, r_odd)) = verblunsky_pairs(&c1, &c2, n);
        println!("site {n}: (α_{}, ρ) = ({a_even:.3}, {r_even:.3}), (α_{}, ρ) = ({a_odd:.3}, {r_odd:.3})", 2 * n, 2 * n - 1);
    }

    let walk = SplitStepWalk::new(c1, c2);
    let factors = walk.cmv_factors();
    let mut psi = WalkState::basis(0, Spin::Plus);
    println!("δ_0⁺ sits at CMV index {}", CmvIndex::from_site(0, Spin::Plus).0);
    let mut seq = psi.to_cmv();
    let mut worst = 0.0f64;
    for _ in 0..250 {
        psi = step_split(&walk, &psi);
        seq = step_cmv(&factors, &seq);
        worst = worst.max(psi.max_abs_diff(&WalkState::from_cmv(&seq)));
    }
    println!("250 steps: max |split − CMV| = {worst:.1e}, ‖ψ‖² − 1 = {:.1e}", psi.norm_sqr() - 1.0);
}

//! Ballistic spreading of homogeneous walks: the velocity proxy approaches |a|.

use num_complex::Complex64;
use qwalk_lab::observables::{default_family, linear_grid, velocity_proxy, PositionDistribution};
use qwalk_lab::walk::evolve;
use qwalk_lab::{CoinSequence, Spin, SplitStepWalk, WalkState};

fn main() {
    let grid = linear_grid(250, 2000);
    println!("{:>8} {:>10} {:>12}", "|a|", "proxy", "max v̂");
    for a in [0.3, std::f64::consts::FRAC_1_SQRT_2, 0.95] {
        let walk = SplitStepWalk::symmetric(CoinSequence::homogeneous(Complex64::new(a, 0.0)).unwrap());
        let est = velocity_proxy(&walk, &default_family(), &grid, 0.5).unwrap();
        println!("{a:>8.4} {:>10.4} {:>12.4}", est.proxy, est.max_vhat());
    }

    let walk = SplitStepWalk::symmetric(CoinSequence::hadamard());
    let t = 500;
    let psi = evolve(&walk, &WalkState::basis(0, Spin::Plus), t).state;
    let d = PositionDistribution::from_state(&psi, t);
    println!("\nHadamard, δ_0⁺, t = {t}: E[X²] = {:.1}", d.second_moment());
    for v in [0.1, 0.5, 1.0] {
        println!(
            "  P(|X| ≥ {v}·t) = {:.4} ≤ Chebyshev {:.4}",
            d.tail_probability(v).unwrap(),
            d.chebyshev_bound(v)
        );
    }
}

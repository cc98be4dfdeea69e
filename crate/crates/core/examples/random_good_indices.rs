//! Random coins with P(|a| ≤ x) = x^α: good indices, gaps and velocity.

use qwalk_lab::random::{
    block_gap_diagnostics, empirical_cdf, extract_good_from_coins, random_zero_velocity_experiment, RandomCoins,
    RandomExperiment, TailDistribution,
};
use qwalk_lab::CoinSequence;

fn main() {
    let n_max = 100_000;
    for (name, dist) in [("α = 1/2", TailDistribution::power_law(0.5).unwrap()), ("uniform", TailDistribution::uniform())] {
        let coins = RandomCoins::new(dist.clone(), 1, n_max);
        println!("{name}: F̂(0.01) = {:.4}, F(0.01) = {:.4}", empirical_cdf(&coins, 0.01), dist.cdf(0.01));
        let scan = extract_good_from_coins(&CoinSequence::random(coins), n_max);
        for n in [1_000, 10_000, 100_000] {
            println!("  good indices ≤ {n}: {}", scan.count_up_to(true, n));
        }
        let d = block_gap_diagnostics(&scan, dist.alpha);
        println!(
            "  empty dyadic blocks (n = 5..15): {:.2}, envelope violations {}",
            d.positive.empty_dyadic_fraction(5..=15).unwrap_or(f64::NAN),
            d.positive.envelope_violations.len()
        );
    }

    let exp = RandomExperiment::new(TailDistribution::power_law(0.5).unwrap(), (1..=6).collect(), 20_000, 1000);
    let report = random_zero_velocity_experiment(&exp).unwrap();
    for row in report.rows() {
        println!("seed {}: bound {:.3e}, v̂({}) = {:.4}", row.seed, row.bound_estimate, exp.t_max, row.vhat_tmax);
    }
    println!("median v̂ {:.4}, hypotheses hold on {:.0}% of seeds", report.median_vhat, 100.0 * report.hypotheses_fraction);
}

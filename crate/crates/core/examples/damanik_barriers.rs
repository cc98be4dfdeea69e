//! Sparse barriers |a(L_m)| = L_m^{−η} at L_m = 2^{m!}: no bound applies.

use qwalk_lab::bounds::{classify, gap_stats, gap_weighted_bound};
use qwalk_lab::coins::{barrier_growth_log2, factorial_barrier_sites, DamanikSpec};
use qwalk_lab::observables::{localized_family, velocity_proxy};
use qwalk_lab::{CoinSequence, SparseSubsequence, SplitStepWalk};

fn main() {
    let sites = factorial_barrier_sites(4);
    println!("barrier sites {sites:?}");
    let spec = DamanikSpec { eta: 0.5, sites: sites.clone() };
    for &s in &sites {
        println!("  |a({s})| = {:.3e}", spec.barrier_abs(s));
    }
    // log₂ of L_{m+1}·|a(L_m)| for the next few (too large to materialize) sites.
    let log_sites: Vec<f64> = (1..=7u32).map(|m| (1..=m).product::<u32>() as f64).collect();
    println!("log₂(L_(m+1)·|a(L_m)|): {:?}", barrier_growth_log2(0.5, &log_sites));

    let coins = CoinSequence::damanik(spec).unwrap();
    let mut with_zero = vec![0];
    with_zero.extend(&sites);
    let seq = SparseSubsequence::explicit(&with_zero).unwrap();
    println!("gap statistics: {}", gap_stats(&seq).map(|s| s.q().to_string()).unwrap_or_else(|e| e.to_string()));
    println!("gap-weighted: {}", gap_weighted_bound(&seq, &coins).note);
    println!("classification: {}", classify(&seq, &coins).label);

    let walk = SplitStepWalk::symmetric(coins);
    let est = velocity_proxy(&walk, &localized_family(), &[100, 200, 400, 800], 0.5).unwrap();
    println!("finite-time velocity proxy {:.4}", est.proxy);
}

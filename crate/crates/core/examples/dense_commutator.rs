//! Closed-form commutator norms against dense singular values.

use qwalk_lab::bounds::{commutator_norm_formula, ModifiedKind};
use qwalk_lab::dense::{
    build_truncated, check_commutator, commutator_window, random_subsequence, random_unitary_coins,
    velocity_symmetry_check,
};
use qwalk_lab::walk::CmvFactors;

fn main() {
    let seq = random_subsequence(7, 6, 8);
    let sites: Vec<i64> = seq.iter().map(|(_, j)| j).collect();
    println!("subsequence {sites:?}");
    let lo = sites[0] - 1;
    let hi = sites[sites.len() - 1] + 1;
    let c1 = random_unitary_coins(1, lo, hi);
    let c2 = random_unitary_coins(2, lo, hi);

    println!("{:>6} {:>2} {:>14} {:>14} {:>9}", "kind", "N", "formula", "dense", "diff");
    for kind in [ModifiedKind::Tilde, ModifiedKind::Hat] {
        for n in 0..4 {
            let chk = check_commutator(&seq, &c2, &c1, kind, n, commutator_norm_formula).unwrap();
            println!("{:>6} {n:>2} {:>14.10} {:>14.10} {:>9.1e}", format!("{kind:?}"), chk.formula, chk.dense, chk.diff);
        }
    }

    let window = commutator_window(&seq).unwrap();
    let t = build_truncated(&CmvFactors { c1, c2 }, window);
    println!("window [{}, {}]: ‖W W† − I‖ = {:.1e}", window.lo, window.hi, t.w.unitarity_defect());

    let family: Vec<_> = (0..3)
        .map(|i| {
            let mut v = nalgebra::DVector::zeros(window.len());
            v[window.len() / 2 + i] = num_complex::Complex64::new(1.0, 0.0);
            v
        })
        .collect();
    let sym = velocity_symmetry_check(&t.l, &t.m, &[10, 20, 30, 40], &family, true);
    println!("velocity proxies for LM, ML, T⁻¹MLT: {:?}", sym.proxies);
}

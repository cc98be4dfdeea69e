//! Dense truncations of `L`, `M`, `W = LM`, `Q` and the block-scalar
//! surrogates on a finite CMV window, used as brute-force oracles.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, ModifiedKind, ModifiedPosition};
use crate::coins::{CoinSequence, LocalCoin};
use crate::error::{Error, Result};
use crate::lattice::{CmvIndex, CmvVector, WalkState};
use crate::subsequence::SparseSubsequence;
use crate::walk::CmvFactors;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Windows above this size use power iteration for operator norms.
pub const SVD_LIMIT: usize = 2048;

/// How 2×2 blocks cut by the window edge are completed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Cut blocks become `1` on the surviving index.
    IdentityCompletion,
}

/// Inclusive CMV window `[lo, hi]` of even length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CmvWindow {
    pub lo: i64,
    pub hi: i64,
}

impl CmvWindow {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if hi < lo || (hi - lo + 1) % 2 != 0 {
            return Err(Error::Alignment { lo, hi, reason: "window length must be a positive even number".into() });
        }
        Ok(CmvWindow { lo, hi })
    }

    /// Window whose first index opens an `M` block (`lo` odd).
    pub fn m_aligned(lo: i64, hi: i64) -> Result<Self> {
        let w = Self::new(lo, hi)?;
        if lo.rem_euclid(2) != 1 {
            return Err(Error::Alignment { lo, hi, reason: "M blocks {2n−1, 2n} need an odd start".into() });
        }
        Ok(w)
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, n: i64) -> Option<usize> {
        (self.lo..=self.hi).contains(&n).then(|| (n - self.lo) as usize)
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi
    }
}

/// A square matrix on a CMV window.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    pub window: CmvWindow,
    pub matrix: DMatrix<C>,
    pub boundary: Boundary,
}

impl TruncatedOperator {
    pub fn identity(window: CmvWindow) -> Self {
        TruncatedOperator {
            window,
            matrix: DMatrix::identity(window.len(), window.len()),
            boundary: Boundary::IdentityCompletion,
        }
    }

    pub fn diagonal(window: CmvWindow, f: impl Fn(i64) -> f64) -> Self {
        let d = DVector::from_iterator(window.len(), window.indices().map(|n| C::new(f(n), 0.0)));
        TruncatedOperator {
            window,
            matrix: DMatrix::from_diagonal(&d),
            boundary: Boundary::IdentityCompletion,
        }
    }

    /// Block-diagonal factor with `σ_x C(n)` on `{2n + shift − 1, 2n + shift}`.
    fn factor(window: CmvWindow, coins: &CoinSequence, odd_start: bool) -> Self {
        let mut op = Self::identity(window);
        let first = if (window.lo.rem_euclid(2) == 1) == odd_start { window.lo } else { window.lo + 1 };
        let mut k = first;
        while k < window.hi {
            let n = if odd_start { (k + 1) / 2 } else { k.div_euclid(2) };
            let t = coins.coin_at(n).cmv_block();
            let i = window.index(k).unwrap();
            for r in 0..2 {
                for c in 0..2 {
                    op.matrix[(i + r, i + c)] = t[r][c];
                }
            }
            k += 2;
        }
        op
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mul(&self, other: &TruncatedOperator) -> TruncatedOperator {
        TruncatedOperator { window: self.window, matrix: &self.matrix * &other.matrix, boundary: self.boundary }
    }

    pub fn adjoint(&self) -> TruncatedOperator {
        TruncatedOperator { window: self.window, matrix: self.matrix.adjoint(), boundary: self.boundary }
    }

    /// `max |U U† − I|` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        let p = &self.matrix * self.matrix.adjoint();
        max_abs(&(p - DMatrix::<C>::identity(self.len(), self.len())))
    }

    /// Nonzero entries per row, for repeated matrix-vector products.
    pub fn sparse_rows(&self) -> SparseRows {
        let rows = (0..self.len())
            .map(|r| {
                (0..self.len())
                    .filter_map(|c| {
                        let z = self.matrix[(r, c)];
                        (z != ZERO).then_some((c, z))
                    })
                    .collect()
            })
            .collect();
        SparseRows { rows }
    }

    /// Embeds a lattice state; amplitudes outside the window are dropped.
    pub fn embed(&self, state: &WalkState) -> DVector<C> {
        let cmv = state.to_cmv();
        DVector::from_iterator(self.len(), self.window.indices().map(|n| cmv.get(n)))
    }

    pub fn extract(&self, v: &DVector<C>) -> WalkState {
        WalkState::from_cmv(&CmvVector::new(self.window.lo, v.iter().copied().collect()))
    }

    /// Writes `row, col, re, im` for every nonzero entry, indices in CMV
    /// coordinates.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            row: i64,
            col: i64,
            re: f64,
            im: f64,
        }
        let mut w = csv::Writer::from_writer(writer);
        for r in 0..self.len() {
            for c in 0..self.len() {
                let z = self.matrix[(r, c)];
                if z != ZERO {
                    w.serialize(Row { row: self.window.lo + r as i64, col: self.window.lo + c as i64, re: z.re, im: z.im })?;
                }
            }
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

/// Row-compressed form of a banded operator.
#[derive(Debug, Clone)]
pub struct SparseRows {
    rows: Vec<Vec<(usize, C)>>,
}

impl SparseRows {
    pub fn apply(&self, v: &DVector<C>) -> DVector<C> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows.iter().map(|row| row.iter().map(|&(c, z)| z * v[c]).sum()),
        )
    }
}

/// `L`, `M` and `W = L·M` on one window.
#[derive(Debug, Clone)]
pub struct TruncatedFactors {
    pub l: TruncatedOperator,
    pub m: TruncatedOperator,
    pub w: TruncatedOperator,
}

/// Builds the truncated factors; blocks cut by the edge become identity.
pub fn build_truncated(factors: &CmvFactors, window: CmvWindow) -> TruncatedFactors {
    let m = TruncatedOperator::factor(window, &factors.c2, true);
    let l = TruncatedOperator::factor(window, &factors.c1, false);
    let w = l.mul(&m);
    TruncatedFactors { l, m, w }
}

/// The factor carrying `a_k`: `M` for `k = 2`, `M̃ = ⊕ σ_x C₁(n)` on
/// `{2n−1, 2n}` for `k = 1`.
pub fn active_factor(factors: &CmvFactors, k: u8, window: CmvWindow) -> Result<TruncatedOperator> {
    let coins = match k {
        1 => &factors.c1,
        2 => &factors.c2,
        _ => return Err(Error::InvalidArgument(format!("coin index must be 1 or 2, got {k}"))),
    };
    Ok(TruncatedOperator::factor(window, coins, true))
}

/// `Q`: multiplication by `⌈n/2⌉`.
pub fn position_matrix(window: CmvWindow) -> TruncatedOperator {
    TruncatedOperator::diagonal(window, |n| CmvIndex(n).site() as f64)
}

/// `Q̃_N` or `Q̂_N` on the window.
pub fn modified_position_matrix(
    seq: &SparseSubsequence,
    kind: ModifiedKind,
    n: usize,
    window: CmvWindow,
) -> Result<TruncatedOperator> {
    let q = ModifiedPosition { kind, n, seq };
    let mut values = Vec::with_capacity(window.len());
    for k in window.indices() {
        let v = seq.block_of_cmv(k).and_then(|m| q.block_value(m)).ok_or_else(|| Error::Alignment {
            lo: window.lo,
            hi: window.hi,
            reason: format!("index {k} lies outside the materialized blocks"),
        })?;
        values.push(v);
    }
    Ok(TruncatedOperator::diagonal(window, |k| values[(k - window.lo) as usize]))
}

/// `AB − BA`.
pub fn dense_commutator(a: &TruncatedOperator, b: &TruncatedOperator) -> TruncatedOperator {
    TruncatedOperator {
        window: a.window,
        matrix: &a.matrix * &b.matrix - &b.matrix * &a.matrix,
        boundary: a.boundary,
    }
}

pub fn max_abs(m: &DMatrix<C>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest off-diagonal modulus.
pub fn offdiag_max(m: &DMatrix<C>) -> f64 {
    let mut worst = 0.0f64;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if r != c {
                worst = worst.max(m[(r, c)].norm());
            }
        }
    }
    worst
}

/// Largest singular value: SVD up to [`SVD_LIMIT`], power iteration on
/// `A†A` beyond.
pub fn operator_norm(m: &DMatrix<C>) -> f64 {
    if m.nrows() <= SVD_LIMIT {
        m.singular_values().iter().copied().fold(0.0, f64::max)
    } else {
        power_iteration_norm(m, 500, 1e-13)
    }
}

/// `‖A‖` via power iteration on `A†A` from a fixed deterministic start.
pub fn power_iteration_norm(m: &DMatrix<C>, max_iter: usize, tol: f64) -> f64 {
    let n = m.ncols();
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v = DVector::from_iterator(n, (0..n).map(|_| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)));
    v /= C::new(v.norm(), 0.0);
    let mut sigma = 0.0;
    for _ in 0..max_iter {
        let w = m.adjoint() * (m * &v);
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        let next = nw.sqrt();
        v = w / C::new(nw, 0.0);
        if (next - sigma).abs() <= tol * next {
            return next;
        }
        sigma = next;
    }
    sigma
}

/// Window `[2 j_{−(H−1)} − 1, 2 j_{H−1}]` covering every interface the
/// truncated formulas use.
pub fn commutator_window(seq: &SparseSubsequence) -> Result<CmvWindow> {
    let h = seq.horizon() as i64;
    if h < 2 {
        return Err(Error::InsufficientData { needed: 2, got: h as usize });
    }
    CmvWindow::m_aligned(2 * seq.j(-(h - 1)) - 1, 2 * seq.j(h - 1))
}

/// Closed-form commutator evaluator, swappable for negative tests.
pub type CommutatorFormula = fn(&SparseSubsequence, &CoinSequence, ModifiedKind, usize) -> f64;

/// Formula vs dense singular values for one `(kind, N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutatorCheck {
    pub kind: ModifiedKind,
    #[serde(rename = "N")]
    pub n: usize,
    pub window_len: usize,
    pub interfaces: usize,
    pub formula: f64,
    pub dense: f64,
    pub diff: f64,
    /// Off-diagonal max of `[D, M][D, M]†`.
    pub offdiag: f64,
    /// `[D, L]` vanishes (block-scalar D commutes with L).
    pub commutes_with_l: f64,
}

/// Compares `formula` with `‖[D, M]‖` where `M` carries `coins` (the active
/// factor) and `D` is the chosen surrogate.
pub fn check_commutator(
    seq: &SparseSubsequence,
    coins: &CoinSequence,
    other: &CoinSequence,
    kind: ModifiedKind,
    n: usize,
    formula: CommutatorFormula,
) -> Result<CommutatorCheck> {
    let window = commutator_window(seq)?;
    let factors = CmvFactors { c1: other.clone(), c2: coins.clone() };
    let t = build_truncated(&factors, window);
    let d = modified_position_matrix(seq, kind, n, window)?;
    let comm = dense_commutator(&d, &t.m);
    let prod = &comm.matrix * comm.matrix.adjoint();
    let dense = operator_norm(&comm.matrix);
    let f = formula(seq, coins, kind, n);
    let comm_l = dense_commutator(&d, &t.l);
    Ok(CommutatorCheck {
        kind,
        n,
        window_len: window.len(),
        interfaces: 2 * seq.horizon() - 1,
        formula: f,
        dense,
        diff: (f - dense).abs(),
        offdiag: offdiag_max(&prod),
        commutes_with_l: max_abs(&comm_l.matrix),
    })
}

/// Finite-time velocity proxies for two orderings (and optionally a third).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub proxies: Vec<f64>,
    pub max_discrepancy: f64,
    pub t_grid: Vec<usize>,
}

/// `max_ψ max_{t in last quartile} ‖Q U^t ψ‖ / t`.
pub fn dense_velocity_proxy(
    step: &dyn Fn(&DVector<C>) -> DVector<C>,
    position: &TruncatedOperator,
    family: &[DVector<C>],
    t_grid: &[usize],
) -> f64 {
    let mut grid = t_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let tail = &grid[crate::observables::tail_start_index(grid.len())..];
    let q: Vec<f64> = (0..position.len()).map(|i| position.matrix[(i, i)].re).collect();
    let mut best = 0.0f64;
    for psi in family {
        let mut v = psi.clone();
        let mut t = 0;
        for &target in &grid {
            while t < target {
                v = step(&v);
                t += 1;
            }
            if target > 0 && tail.contains(&target) {
                let qn: f64 = v.iter().zip(&q).map(|(z, &x)| (z * x).norm_sqr()).sum::<f64>().sqrt();
                best = best.max(qn / target as f64);
            }
        }
    }
    best
}

/// Cyclic translation by one index on the window.
pub fn cyclic_shift(window: CmvWindow) -> TruncatedOperator {
    let n = window.len();
    let mut m = DMatrix::<C>::zeros(n, n);
    for i in 0..n {
        m[((i + 1) % n, i)] = ONE;
    }
    TruncatedOperator { window, matrix: m, boundary: Boundary::IdentityCompletion }
}

/// Compares `U₁U₂`, `U₂U₁` and, if `conjugate` is set, `T⁻¹ U₂U₁ T`.
pub fn velocity_symmetry_check(
    u1: &TruncatedOperator,
    u2: &TruncatedOperator,
    t_grid: &[usize],
    family: &[DVector<C>],
    conjugate: bool,
) -> SymmetryReport {
    let q = position_matrix(u1.window);
    let s1 = u1.sparse_rows();
    let s2 = u2.sparse_rows();
    let p12 = dense_velocity_proxy(&|v| s1.apply(&s2.apply(v)), &q, family, t_grid);
    let p21 = dense_velocity_proxy(&|v| s2.apply(&s1.apply(v)), &q, family, t_grid);
    let mut proxies = vec![p12, p21];
    if conjugate {
        let t = cyclic_shift(u1.window);
        let conj = t.adjoint().mul(&u2.mul(u1)).mul(&t).sparse_rows();
        proxies.push(dense_velocity_proxy(&|v| conj.apply(v), &q, family, t_grid));
    }
    let max_discrepancy = proxies
        .iter()
        .flat_map(|a| proxies.iter().map(move |b| (a - b).abs()))
        .fold(0.0, f64::max);
    SymmetryReport { proxies, max_discrepancy, t_grid: t_grid.to_vec() }
}

/// Result of the `Q`-bound witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QBoundWitness {
    pub c_n: f64,
    /// Smallest `M` with `|Q(n) − Q̃(n)| ≤ M + c_N |Q(n)|` on the window.
    pub m_const: f64,
    /// `max (‖(Q − Q̃)ϕ‖ − M‖ϕ‖ − c_N‖Qϕ‖)` over the random samples.
    pub worst_slack: f64,
    pub samples: usize,
}

/// Checks `‖(Q − Q̃_N)ϕ‖ ≤ M‖ϕ‖ + c_N‖Qϕ‖` on random `ϕ`.
pub fn q_bound_witness(seq: &SparseSubsequence, n: usize, q: f64, samples: usize, seed: u64) -> Result<QBoundWitness> {
    let window = commutator_window(seq)?;
    let pos = position_matrix(window);
    let tilde = modified_position_matrix(seq, ModifiedKind::Tilde, n, window)?;
    let c_n = bounds::relative_bound_constant(q, n);
    let len = window.len();
    let qd: Vec<f64> = (0..len).map(|i| pos.matrix[(i, i)].re).collect();
    let td: Vec<f64> = (0..len).map(|i| tilde.matrix[(i, i)].re).collect();
    let m_const = (0..len)
        .map(|i| ((qd[i] - td[i]).abs() - c_n * qd[i].abs()).max(0.0))
        .fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let phi: Vec<C> = (0..len).map(|_| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let norm = |f: &dyn Fn(usize) -> f64| phi.iter().enumerate().map(|(i, z)| (z * f(i)).norm_sqr()).sum::<f64>().sqrt();
        let lhs = norm(&|i| qd[i] - td[i]);
        let rhs = m_const * norm(&|_| 1.0) + c_n * norm(&|i| qd[i]);
        worst = worst.max(lhs - rhs);
    }
    Ok(QBoundWitness { c_n, m_const, worst_slack: worst, samples })
}

/// Identity coin outside a table of random unitary coins on `[lo, hi]`.
pub fn random_unitary_coins(seed: u64, lo: i64, hi: i64) -> CoinSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = (lo..=hi)
        .map(|n| {
            let r: f64 = rng.random();
            let pa = rng.random::<f64>() * std::f64::consts::TAU;
            let pb = rng.random::<f64>() * std::f64::consts::TAU;
            let a = C::from_polar(r, pa);
            let b = C::from_polar((1.0 - r * r).sqrt(), pb);
            (n, LocalCoin::new(a, b).expect("unit modulus by construction"))
        })
        .collect();
    CoinSequence::table(table, LocalCoin::hadamard())
}

/// Random explicit subsequence: `per_side` gaps in `1..=max_gap` on each
/// side, plus one extra site beyond each end so every block value exists.
pub fn random_subsequence(seed: u64, per_side: usize, max_gap: i64) -> SparseSubsequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sites = vec![0i64];
    let mut s = 0;
    for _ in 0..=per_side {
        s += rng.random_range(1..=max_gap);
        sites.push(s);
    }
    let mut s = 0;
    let mut neg = Vec::new();
    for _ in 0..=per_side {
        s -= rng.random_range(1..=max_gap);
        neg.push(s);
    }
    neg.reverse();
    neg.extend(sites);
    SparseSubsequence::explicit(&neg).expect("strictly increasing by construction")
}

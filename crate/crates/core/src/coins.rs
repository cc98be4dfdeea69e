//! Local coins `C(n) = [[a, b], [−b̄, ā]]` and the coin-sequence families used
//! by the experiments.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Read;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::SiteIndex;
use crate::random::RandomCoins;
use crate::subsequence::SparseSubsequence;

/// Tolerance on `|a|² + |b|² = 1`.
pub const UNITARITY_TOL: f64 = 1e-12;

/// One 2×2 coin `[[a, b], [−conj(b), conj(a)]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalCoin {
    a: Complex64,
    b: Complex64,
}

impl LocalCoin {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let s = a.norm_sqr() + b.norm_sqr();
        if !s.is_finite() || (s - 1.0).abs() > UNITARITY_TOL {
            return Err(Error::InvalidCoin(format!(
                "|a|² + |b|² = {s}, expected 1 (a = {a}, b = {b})"
            )));
        }
        Ok(LocalCoin { a, b })
    }

    /// Coin with transmission entry `a` and real nonnegative `b = √(1 − |a|²)`.
    pub fn from_transmission(a: Complex64) -> Result<Self> {
        let n2 = a.norm_sqr();
        if !n2.is_finite() || n2.sqrt() > 1.0 + UNITARITY_TOL {
            return Err(Error::InvalidCoin(format!("|a| = {} exceeds 1", n2.sqrt())));
        }
        if n2 >= 1.0 {
            // Rounding slack: rescale onto the unit circle.
            return Ok(LocalCoin {
                a: a / n2.sqrt(),
                b: Complex64::new(0.0, 0.0),
            });
        }
        Ok(LocalCoin {
            a,
            b: Complex64::new((1.0 - n2).sqrt(), 0.0),
        })
    }

    /// Real transmission `|a| = abs` with `b = √(1 − abs²)`.
    pub fn from_abs(abs: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&abs) {
            return Err(Error::InvalidCoin(format!("|a| = {abs} outside [0, 1]")));
        }
        Self::from_transmission(Complex64::new(abs, 0.0))
    }

    pub fn identity() -> Self {
        LocalCoin {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// `a = 0, b = 1`.
    pub fn reflector() -> Self {
        LocalCoin {
            a: Complex64::new(0.0, 0.0),
            b: Complex64::new(1.0, 0.0),
        }
    }

    /// `a = b = 1/√2`.
    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        LocalCoin {
            a: Complex64::new(h, 0.0),
            b: Complex64::new(h, 0.0),
        }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// Multiplies the transmission entry by `e^{iφ}`.
    pub fn with_phase(self, phi: f64) -> Self {
        LocalCoin {
            a: self.a * Complex64::from_polar(1.0, phi),
            b: self.b,
        }
    }

    /// Row-major `C(n)`.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.a, self.b], [-self.b.conj(), self.a.conj()]]
    }

    /// CMV block `Θ = σ_x C = [[−b̄, ā], [a, b]]`.
    pub fn cmv_block(&self) -> [[Complex64; 2]; 2] {
        [[-self.b.conj(), self.a.conj()], [self.a, self.b]]
    }

    /// Verblunsky pair `(α, ρ) = (−b, a)` so that `Θ = Θ(α, ρ)`.
    pub fn verblunsky(&self) -> (Complex64, Complex64) {
        (-self.b, self.a)
    }

    /// `C (ψ⁺, ψ⁻)`.
    #[inline(always)]
    pub fn apply(&self, plus: Complex64, minus: Complex64) -> (Complex64, Complex64) {
        (
            self.a * plus + self.b * minus,
            -self.b.conj() * plus + self.a.conj() * minus,
        )
    }

    /// `Θ (x, y)` on a CMV index pair.
    #[inline(always)]
    pub fn apply_cmv(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        (
            -self.b.conj() * x + self.a.conj() * y,
            self.a * x + self.b * y,
        )
    }

    /// `max |C C† − 1|` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        let m = self.matrix();
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    acc += m[r][k] * m[c][k].conj();
                }
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }
}

/// Tag for the family a [`CoinSequence`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoinKind {
    Homogeneous,
    Table,
    SparseOverlay,
    Random,
    Damanik,
}

/// `m ↦ |a(j_m)|` along a subsequence.
#[derive(Clone)]
pub enum Decay {
    /// Perfect reflectors.
    Zero,
    Constant(f64),
    /// `scale / (1 + |m|)`.
    InverseIndex { scale: f64 },
    /// `1 / (1 + j_m²)`.
    InverseSiteSquare,
    /// `min(1, scale / |j_m|)`, with `1` at `j_m = 0`.
    InverseSite { scale: f64 },
    /// Arbitrary rule of `(m, j_m)`.
    Custom(Arc<dyn Fn(i64, SiteIndex) -> f64 + Send + Sync>),
}

impl fmt::Debug for Decay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decay::Zero => write!(f, "Zero"),
            Decay::Constant(v) => write!(f, "Constant({v})"),
            Decay::InverseIndex { scale } => write!(f, "InverseIndex {{ scale: {scale} }}"),
            Decay::InverseSiteSquare => write!(f, "InverseSiteSquare"),
            Decay::InverseSite { scale } => write!(f, "InverseSite {{ scale: {scale} }}"),
            Decay::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Decay {
    pub fn value(&self, m: i64, site: SiteIndex) -> f64 {
        match self {
            Decay::Zero => 0.0,
            Decay::Constant(v) => *v,
            Decay::InverseIndex { scale } => scale / (1.0 + m.unsigned_abs() as f64),
            Decay::InverseSiteSquare => {
                let j = site as f64;
                1.0 / (1.0 + j * j)
            }
            Decay::InverseSite { scale } => {
                if site == 0 {
                    1.0
                } else {
                    (scale / site.unsigned_abs() as f64).min(1.0)
                }
            }
            Decay::Custom(f) => f(m, site),
        }
    }
}

/// Base coin off the subsequence and `|a|` along it.
#[derive(Debug, Clone)]
pub struct SparseOverlaySpec {
    pub base: LocalCoin,
    pub sites: SparseSubsequence,
    pub decay: Decay,
}

/// Half-line sparse barriers `|a(L_m)| = L_m^{−(1−η)/(2η)}`, identity
/// elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DamanikSpec {
    pub eta: f64,
    pub sites: Vec<SiteIndex>,
}

impl DamanikSpec {
    /// Exponent `(1 − η) / (2η)`.
    pub fn exponent(&self) -> f64 {
        (1.0 - self.eta) / (2.0 * self.eta)
    }

    pub fn barrier_abs(&self, site: SiteIndex) -> f64 {
        (site as f64).powf(-self.exponent())
    }
}

/// `L_m = 2^{m!}` for `m = 1, 2, …` while the site fits in `i64`.
pub fn factorial_barrier_sites(count: usize) -> Vec<SiteIndex> {
    let mut out = Vec::new();
    let mut fact: u64 = 1;
    for m in 1..=count as u64 {
        fact *= m;
        if fact >= 63 {
            break;
        }
        out.push(1i64 << fact);
    }
    out
}

/// `log₂(L_{m+1} |a(L_m)|)` from `log₂ L_m`, for barriers too large to store.
pub fn barrier_growth_log2(eta: f64, log2_sites: &[f64]) -> Vec<f64> {
    let e = (1.0 - eta) / (2.0 * eta);
    log2_sites
        .windows(2)
        .map(|w| w[1] - e * w[0])
        .collect()
}

#[derive(Debug)]
enum CoinRule {
    Homogeneous(LocalCoin),
    Table {
        coins: BTreeMap<SiteIndex, LocalCoin>,
        default: LocalCoin,
    },
    SparseOverlay {
        spec: SparseOverlaySpec,
        coins: HashMap<SiteIndex, LocalCoin>,
    },
    Random(RandomCoins),
    Damanik {
        spec: DamanikSpec,
        coins: HashMap<SiteIndex, LocalCoin>,
    },
    Phased {
        inner: CoinSequence,
        phases: BTreeMap<SiteIndex, f64>,
    },
}

/// Total map from sites to local coins. Cheap to clone and immutable.
#[derive(Debug, Clone)]
pub struct CoinSequence {
    rule: Arc<CoinRule>,
}

impl CoinSequence {
    fn from_rule(rule: CoinRule) -> Self {
        CoinSequence { rule: Arc::new(rule) }
    }

    /// Same coin at every site, `b = √(1 − |a|²)`.
    pub fn homogeneous(a: Complex64) -> Result<Self> {
        Ok(Self::from_rule(CoinRule::Homogeneous(LocalCoin::from_transmission(a)?)))
    }

    pub fn constant(coin: LocalCoin) -> Self {
        Self::from_rule(CoinRule::Homogeneous(coin))
    }

    pub fn identity() -> Self {
        Self::constant(LocalCoin::identity())
    }

    pub fn hadamard() -> Self {
        Self::constant(LocalCoin::hadamard())
    }

    /// Explicit table with a default for unlisted sites.
    pub fn table(coins: BTreeMap<SiteIndex, LocalCoin>, default: LocalCoin) -> Self {
        Self::from_rule(CoinRule::Table { coins, default })
    }

    /// Loads `n, re_a, im_a, re_b, im_b` rows.
    pub fn table_from_csv<R: Read>(reader: R, default: LocalCoin) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            n: i64,
            re_a: f64,
            im_a: f64,
            re_b: f64,
            im_b: f64,
        }
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut coins = BTreeMap::new();
        for row in r.deserialize() {
            let row: Row = row?;
            let coin = LocalCoin::new(Complex64::new(row.re_a, row.im_a), Complex64::new(row.re_b, row.im_b))
                .map_err(|e| Error::InvalidCoin(format!("site {}: {e}", row.n)))?;
            coins.insert(row.n, coin);
        }
        Ok(Self::table(coins, default))
    }

    /// Base coin everywhere except `j_m`, where `|a| = decay(m)`. Sites
    /// beyond the materialized horizon carry the base coin.
    pub fn sparse_overlay(spec: SparseOverlaySpec) -> Result<Self> {
        let mut coins = HashMap::with_capacity(spec.sites.sites().len());
        for (m, j) in spec.sites.iter() {
            let v = spec.decay.value(m, j);
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidCoin(format!("decay at m = {m} is {v}, outside [0, 1]")));
            }
            coins.insert(j, LocalCoin::from_abs(v)?);
        }
        Ok(Self::from_rule(CoinRule::SparseOverlay { spec, coins }))
    }

    pub fn damanik(spec: DamanikSpec) -> Result<Self> {
        if !(spec.eta > 0.0 && spec.eta < 1.0) {
            return Err(Error::InvalidParameter(format!("eta = {} outside (0, 1)", spec.eta)));
        }
        if spec.sites.windows(2).any(|w| w[0] >= w[1]) || spec.sites.iter().any(|&s| s < 1) {
            return Err(Error::InvalidParameter(
                "barrier sites must be strictly increasing positive integers".into(),
            ));
        }
        let coins = spec
            .sites
            .iter()
            .map(|&s| Ok((s, LocalCoin::from_abs(spec.barrier_abs(s))?)))
            .collect::<Result<_>>()?;
        Ok(Self::from_rule(CoinRule::Damanik { spec, coins }))
    }

    pub fn random(coins: RandomCoins) -> Self {
        Self::from_rule(CoinRule::Random(coins))
    }

    /// Multiplies `a(n)` by `e^{iφ(n)}` at the listed sites.
    pub fn with_phases(&self, phases: BTreeMap<SiteIndex, f64>) -> Self {
        Self::from_rule(CoinRule::Phased {
            inner: self.clone(),
            phases,
        })
    }

    pub fn kind(&self) -> CoinKind {
        match &*self.rule {
            CoinRule::Homogeneous(_) => CoinKind::Homogeneous,
            CoinRule::Table { .. } => CoinKind::Table,
            CoinRule::SparseOverlay { .. } => CoinKind::SparseOverlay,
            CoinRule::Random(_) => CoinKind::Random,
            CoinRule::Damanik { .. } => CoinKind::Damanik,
            CoinRule::Phased { inner, .. } => inner.kind(),
        }
    }

    /// Overlay parameters, when this is a sparse overlay.
    pub fn overlay_spec(&self) -> Option<&SparseOverlaySpec> {
        match &*self.rule {
            CoinRule::SparseOverlay { spec, .. } => Some(spec),
            CoinRule::Phased { inner, .. } => inner.overlay_spec(),
            _ => None,
        }
    }

    pub fn damanik_spec(&self) -> Option<&DamanikSpec> {
        match &*self.rule {
            CoinRule::Damanik { spec, .. } => Some(spec),
            CoinRule::Phased { inner, .. } => inner.damanik_spec(),
            _ => None,
        }
    }

    pub fn random_coins(&self) -> Option<&RandomCoins> {
        match &*self.rule {
            CoinRule::Random(r) => Some(r),
            CoinRule::Phased { inner, .. } => inner.random_coins(),
            _ => None,
        }
    }

    /// Coin at site `n`.
    pub fn coin_at(&self, n: SiteIndex) -> LocalCoin {
        match &*self.rule {
            CoinRule::Homogeneous(c) => *c,
            CoinRule::Table { coins, default } => coins.get(&n).copied().unwrap_or(*default),
            CoinRule::SparseOverlay { spec, coins } => coins.get(&n).copied().unwrap_or(spec.base),
            CoinRule::Random(r) => r.coin_at(n),
            CoinRule::Damanik { coins, .. } => coins.get(&n).copied().unwrap_or_else(LocalCoin::identity),
            CoinRule::Phased { inner, phases } => {
                let c = inner.coin_at(n);
                match phases.get(&n) {
                    Some(&phi) => c.with_phase(phi),
                    None => c,
                }
            }
        }
    }

    /// `|a(n)|`.
    pub fn transmission_abs(&self, n: SiteIndex) -> f64 {
        self.coin_at(n).a().norm()
    }

    /// Coins for sites `lo..=hi`.
    pub fn materialize(&self, lo: SiteIndex, hi: SiteIndex) -> Vec<LocalCoin> {
        if let CoinRule::Random(r) = &*self.rule {
            return r.materialize(lo, hi);
        }
        (lo..=hi).map(|n| self.coin_at(n)).collect()
    }
}

/// Verblunsky pairs `((α_{2n}, ρ_{2n}), (α_{2n−1}, ρ_{2n−1}))` generated by the
/// coins at site `n`: even pairs from `C₁`, odd pairs from `C₂`.
pub fn verblunsky_pairs(
    c1: &CoinSequence,
    c2: &CoinSequence,
    n: SiteIndex,
) -> ((Complex64, Complex64), (Complex64, Complex64)) {
    (c1.coin_at(n).verblunsky(), c2.coin_at(n).verblunsky())
}

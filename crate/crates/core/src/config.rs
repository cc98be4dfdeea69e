//! Versioned JSON experiment configuration.
//!
//! Parsing is strict: unknown keys are rejected and every error carries the
//! path of the offending key, e.g. `model.c1.params.alpha`.

use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::coins::{factorial_barrier_sites, CoinSequence, DamanikSpec, Decay, LocalCoin, SparseOverlaySpec};
use crate::error::{Error, Result};
use crate::observables::StateSpec;
use crate::random::{RandomCoins, TailDistribution};
use crate::subsequence::SparseSubsequence;
use crate::walk::SplitStepWalk;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_HORIZON: usize = 64;

fn default_tail_v() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub subsequence: Option<SubsequenceSpec>,
    /// Initial-state family; the default family when absent.
    #[serde(default)]
    pub states: Option<Vec<StateSpec>>,
    #[serde(default)]
    pub t_grid: Option<Vec<usize>>,
    /// Inclusive `[N_min, N_max]`.
    #[serde(default)]
    pub n_range: Option<[usize; 2]>,
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default = "default_tail_v")]
    pub tail_v: f64,
    #[serde(default)]
    pub random: Option<RandomSpec>,
    #[serde(default)]
    pub dense: Option<DenseSpec>,
    #[serde(default)]
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub c1: CoinSpec,
    pub c2: CoinSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoinKindName {
    Homogeneous,
    Table,
    SparseOverlay,
    Random,
    Damanik,
}

/// `{kind, params, seed?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoinSpec {
    pub kind: CoinKindName,
    #[serde(default)]
    pub params: Value,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomogeneousParams {
    pub a: f64,
    #[serde(default)]
    pub a_im: f64,
}

impl HomogeneousParams {
    fn coin(&self) -> Result<LocalCoin> {
        LocalCoin::from_transmission(Complex64::new(self.a, self.a_im))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableParams {
    pub path: String,
    #[serde(default)]
    pub default: Option<HomogeneousParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum DecaySpec {
    Zero,
    Constant { value: f64 },
    InverseIndex { scale: f64 },
    InverseSiteSquare,
    InverseSite { scale: f64 },
}

impl DecaySpec {
    fn decay(&self) -> Decay {
        match *self {
            DecaySpec::Zero => Decay::Zero,
            DecaySpec::Constant { value } => Decay::Constant(value),
            DecaySpec::InverseIndex { scale } => Decay::InverseIndex { scale },
            DecaySpec::InverseSiteSquare => Decay::InverseSiteSquare,
            DecaySpec::InverseSite { scale } => Decay::InverseSite { scale },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseOverlayParams {
    /// Off-subsequence coin; Hadamard when absent.
    #[serde(default)]
    pub base: Option<HomogeneousParams>,
    pub decay: DecaySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum DistSpec {
    PowerLaw { alpha: f64 },
    Uniform,
    AtomMixture { p0: f64, alpha: f64 },
}

impl DistSpec {
    pub fn build(&self) -> Result<TailDistribution> {
        match *self {
            DistSpec::PowerLaw { alpha } => TailDistribution::power_law(alpha),
            DistSpec::Uniform => Ok(TailDistribution::uniform()),
            DistSpec::AtomMixture { p0, alpha } => TailDistribution::atom_mixture(p0, alpha),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomParams {
    pub distribution: DistSpec,
    pub n_max: usize,
    #[serde(default)]
    pub channel: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DamanikParams {
    pub eta: f64,
    #[serde(default)]
    pub sites: Option<Vec<i64>>,
    /// Use `L_m = 2^{m!}` for `m = 1..=count`.
    #[serde(default)]
    pub factorial_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule", deny_unknown_fields)]
pub enum SubsequenceSpec {
    Arithmetic { step: i64 },
    Power { exponent: u32 },
    Geometric { base: i64 },
    Explicit { sites: Vec<i64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub distribution: DistSpec,
    pub n_max: usize,
    pub t_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseSpec {
    /// Values of `N` to check.
    #[serde(default = "default_dense_n")]
    pub n_values: Vec<usize>,
    /// Coin index of the active factor.
    #[serde(default = "default_k")]
    pub k: u8,
    /// Blocks per side entering the window.
    #[serde(default = "default_dense_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub dump_matrices: bool,
}

fn default_dense_n() -> Vec<usize> {
    vec![0, 1, 2, 3]
}

fn default_k() -> u8 {
    2
}

fn default_dense_horizon() -> usize {
    6
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema { path: path.into(), message: message.into() }
}

/// Deserializes with the failing key path prefixed by `prefix`.
fn parse_at<T: DeserializeOwned>(value: &Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { prefix.to_string() } else { format!("{prefix}.{inner}") };
        schema(path, e.into_inner().to_string())
    })
}

/// Parsed configuration plus the hash of its source text.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub sha256: String,
}

impl ExperimentConfig {
    /// Parses and validates.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            schema(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<LoadedConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config = Self::from_json(&text)?;
        Ok(LoadedConfig { config, sha256: sha256_hex(text.as_bytes()) })
    }

    /// Semantic checks that serde cannot express.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(schema("schema_version", format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version)));
        }
        if let Some(grid) = &self.t_grid {
            if grid.is_empty() {
                return Err(schema("t_grid", "must contain at least one time"));
            }
        }
        if let Some([lo, hi]) = self.n_range {
            if lo > hi {
                return Err(schema("n_range", format!("empty range [{lo}, {hi}]")));
            }
        }
        if let Some(states) = &self.states {
            if states.is_empty() {
                return Err(schema("states", "family must not be empty"));
            }
        }
        if !(self.tail_v > 0.0) {
            return Err(schema("tail_v", "must be > 0"));
        }
        if let Some(model) = &self.model {
            // Build eagerly so parameter errors surface with paths up front.
            self.coin_sequence(&model.c1, "model.c1", 0)?;
            self.coin_sequence(&model.c2, "model.c2", 1)?;
        }
        if let Some(s) = &self.subsequence {
            self.build_subsequence_spec(s)?;
        }
        if let Some(r) = &self.random {
            r.distribution.build().map_err(|e| schema("random.distribution", e.to_string()))?;
            if r.n_max < 16 {
                return Err(schema("random.n_max", "must be ≥ 16"));
            }
        }
        if let Some(d) = &self.dense {
            if !(1..=2).contains(&d.k) {
                return Err(schema("dense.k", "must be 1 or 2"));
            }
            if d.horizon < 2 {
                return Err(schema("dense.horizon", "must be ≥ 2"));
            }
        }
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        self.horizon.unwrap_or(DEFAULT_HORIZON)
    }

    pub fn n_range(&self) -> std::ops::RangeInclusive<usize> {
        let [lo, hi] = self.n_range.unwrap_or([0, 12]);
        lo..=hi
    }

    pub fn t_grid(&self) -> Result<Vec<usize>> {
        self.t_grid.clone().ok_or_else(|| schema("t_grid", "missing"))
    }

    pub fn states(&self) -> Vec<StateSpec> {
        self.states.clone().unwrap_or_else(crate::observables::default_family)
    }

    fn build_subsequence_spec(&self, spec: &SubsequenceSpec) -> Result<SparseSubsequence> {
        let h = self.horizon();
        let r = match spec {
            SubsequenceSpec::Arithmetic { step } => SparseSubsequence::arithmetic(*step, h),
            SubsequenceSpec::Power { exponent } => SparseSubsequence::power(*exponent, h),
            SubsequenceSpec::Geometric { base } => SparseSubsequence::geometric(*base, h),
            SubsequenceSpec::Explicit { sites } => SparseSubsequence::explicit(sites).map(|s| s.truncated(h)),
        };
        r.map_err(|e| schema("subsequence", e.to_string()))
    }

    pub fn subsequence(&self) -> Result<SparseSubsequence> {
        let spec = self.subsequence.as_ref().ok_or_else(|| schema("subsequence", "missing"))?;
        self.build_subsequence_spec(spec)
    }

    fn coin_sequence(&self, spec: &CoinSpec, path: &str, slot: u64) -> Result<CoinSequence> {
        let params_path = format!("{path}.params");
        let wrap = |e: Error| match e {
            Error::Schema { .. } => e,
            other => schema(params_path.clone(), other.to_string()),
        };
        match spec.kind {
            CoinKindName::Homogeneous => {
                let p: HomogeneousParams = parse_at(&spec.params, &params_path)?;
                Ok(CoinSequence::constant(p.coin().map_err(wrap)?))
            }
            CoinKindName::Table => {
                let p: TableParams = parse_at(&spec.params, &params_path)?;
                let default = match &p.default {
                    Some(d) => d.coin().map_err(wrap)?,
                    None => LocalCoin::hadamard(),
                };
                let f = std::fs::File::open(&p.path).map_err(|e| schema(format!("{params_path}.path"), e.to_string()))?;
                CoinSequence::table_from_csv(f, default).map_err(wrap)
            }
            CoinKindName::SparseOverlay => {
                let p: SparseOverlayParams = parse_at(&spec.params, &params_path)?;
                let base = match &p.base {
                    Some(b) => b.coin().map_err(wrap)?,
                    None => LocalCoin::hadamard(),
                };
                let sites = self
                    .subsequence
                    .as_ref()
                    .ok_or_else(|| schema("subsequence", "required by sparse-overlay coins"))
                    .and_then(|s| self.build_subsequence_spec(s))?;
                CoinSequence::sparse_overlay(SparseOverlaySpec { base, sites, decay: p.decay.decay() }).map_err(wrap)
            }
            CoinKindName::Random => {
                let p: RandomParams = parse_at(&spec.params, &params_path)?;
                let dist = p.distribution.build().map_err(wrap)?;
                let seed = spec
                    .seed
                    .or_else(|| self.seeds.first().copied())
                    .ok_or_else(|| schema(format!("{path}.seed"), "random coins need a seed"))?;
                let channel = p.channel.unwrap_or(slot);
                Ok(CoinSequence::random(RandomCoins::with_channel(dist, seed, channel, p.n_max)))
            }
            CoinKindName::Damanik => {
                let p: DamanikParams = parse_at(&spec.params, &params_path)?;
                let sites = match (&p.sites, p.factorial_count) {
                    (Some(s), None) => s.clone(),
                    (None, Some(c)) => factorial_barrier_sites(c),
                    _ => return Err(schema(params_path, "give exactly one of `sites` or `factorial_count`")),
                };
                CoinSequence::damanik(DamanikSpec { eta: p.eta, sites }).map_err(wrap)
            }
        }
    }

    /// Both coin sequences with `seed` overriding any configured seed.
    pub fn coins(&self, seed_override: Option<u64>) -> Result<(CoinSequence, CoinSequence)> {
        let model = self.model.as_ref().ok_or_else(|| schema("model", "missing"))?;
        let with_seed = |c: &CoinSpec| {
            let mut c = c.clone();
            if seed_override.is_some() && c.kind == CoinKindName::Random {
                c.seed = seed_override;
            }
            c
        };
        Ok((
            self.coin_sequence(&with_seed(&model.c1), "model.c1", 0)?,
            self.coin_sequence(&with_seed(&model.c2), "model.c2", 1)?,
        ))
    }

    pub fn walk(&self, seed_override: Option<u64>) -> Result<SplitStepWalk> {
        let (c1, c2) = self.coins(seed_override)?;
        Ok(SplitStepWalk::new(c1, c2))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const HADAMARD: &str = r#"{
        "schema_version": 1,
        "model": {
            "c1": {"kind": "homogeneous", "params": {"a": 0.7071067811865476}},
            "c2": {"kind": "homogeneous", "params": {"a": 0.7071067811865476}}
        },
        "t_grid": [10, 20]
    }"#;

    fn schema_path(text: &str) -> String {
        match ExperimentConfig::from_json(text) {
            Err(Error::Schema { path, .. }) => path,
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_json(HADAMARD).unwrap();
        assert_eq!(cfg.t_grid().unwrap(), vec![10, 20]);
        assert_eq!(cfg.states().len(), 8);
        let w = cfg.walk(None).unwrap();
        let c = w.c1.coin_at(5);
        assert!((c.b() - LocalCoin::hadamard().b()).norm() < 1e-15);
    }

    #[test]
    fn unknown_keys_are_rejected_with_path() {
        let text = HADAMARD.replace("\"t_grid\"", "\"t_gird\"");
        assert_eq!(schema_path(&text), "t_gird");
        let text = HADAMARD.replacen("{\"a\": 0.7071067811865476}", "{\"a\": 0.5, \"b\": 1}", 1);
        assert_eq!(schema_path(&text), "model.c1.params.b");
    }

    #[test]
    fn empty_grid_is_schema_error() {
        let text = HADAMARD.replace("[10, 20]", "[]");
        assert_eq!(schema_path(&text), "t_grid");
    }

    #[test]
    fn bad_values_report_paths() {
        let text = HADAMARD.replacen("0.7071067811865476", "1.5", 1);
        assert_eq!(schema_path(&text), "model.c1.params");
        let text = HADAMARD.replace("\"schema_version\": 1", "\"schema_version\": 7");
        assert_eq!(schema_path(&text), "schema_version");
        let text = r#"{"schema_version": 1, "model": {"c1": {"kind": "random", "params": {"distribution": {"kind": "power-law", "alpha": 2.0}, "n_max": 10}}, "c2": {"kind": "homogeneous", "params": {"a": 1}}}, "seeds": [1]}"#;
        assert_eq!(schema_path(text), "model.c1.params");
        let text = r#"{"schema_version": 1, "model": {"c1": {"kind": "sparse-overlay", "params": {"decay": {"kind": "zero"}}}, "c2": {"kind": "homogeneous", "params": {"a": 1}}}}"#;
        assert_eq!(schema_path(text), "subsequence");
        let text = r#"{"schema_version": 1, "model": {"c1": {"kind": "spiral", "params": {}}, "c2": {"kind": "homogeneous", "params": {"a": 1}}}}"#;
        assert_eq!(schema_path(text), "model.c1.kind");
    }

    #[test]
    fn overlay_and_damanik() {
        let text = r#"{
            "schema_version": 1,
            "model": {
                "c1": {"kind": "sparse-overlay", "params": {"decay": {"kind": "inverse-index", "scale": 1.0}}},
                "c2": {"kind": "damanik", "params": {"eta": 0.5, "factorial_count": 4}}
            },
            "subsequence": {"rule": "arithmetic", "step": 5},
            "horizon": 10
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let (c1, c2) = cfg.coins(None).unwrap();
        assert_eq!(c1.transmission_abs(10), 1.0 / 3.0);
        assert!((c2.transmission_abs(64) - 0.125).abs() < 1e-15);
        assert_eq!(cfg.subsequence().unwrap().horizon(), 10);
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}

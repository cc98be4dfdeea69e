//! Config-driven pipelines behind the CLI subcommands.
//!
//! Every artifact starts with a `#` metadata line (tool version, config hash,
//! seeds, horizon, generator) followed by a deterministic body, so reruns of
//! the same config produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundInput, BoundReport, CaseClassification, GapStats, GapWeightedBound, ModifiedKind, MIN_HORIZON};
use crate::config::{ExperimentConfig, LoadedConfig};
use crate::dense::{self, CommutatorCheck};
use crate::error::{Error, Result};
use crate::observables::{self, StateTail, VelocityEstimate};
use crate::random::{self, RandomExperiment, RandomExperimentReport, GENERATOR_ID};
use crate::validation::{self, CheckResult, Hooks};
use crate::walk::{CmvFactors, Evolver};

pub const TOOL: &str = "qwalk-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance stamped into every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub seeds: Vec<u64>,
    pub horizon: usize,
    pub generator: String,
}

impl Metadata {
    pub fn header_line(&self) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        format!(
            "# {} {} config_sha256={} seeds={} horizon={} generator=\"{}\"\n",
            self.tool,
            self.version,
            self.config_sha256,
            if seeds.is_empty() { "-".to_string() } else { seeds.join(",") },
            self.horizon,
            self.generator
        )
    }
}

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seeds: Option<Vec<u64>>,
    pub horizon: Option<usize>,
}

/// A config with overrides applied, ready to run.
#[derive(Debug, Clone)]
pub struct Job {
    pub config: ExperimentConfig,
    pub meta: Metadata,
    pub out: PathBuf,
}

impl Job {
    pub fn new(loaded: LoadedConfig, ov: &Overrides) -> Result<Self> {
        let mut config = loaded.config;
        if let Some(s) = &ov.seeds {
            config.seeds = s.clone();
        }
        if let Some(h) = ov.horizon {
            config.horizon = Some(h);
        }
        config.validate()?;
        let out = ov
            .out
            .clone()
            .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        let meta = Metadata {
            tool: TOOL.into(),
            version: VERSION.into(),
            config_sha256: loaded.sha256,
            seeds: config.seeds.clone(),
            horizon: config.horizon(),
            generator: GENERATOR_ID.into(),
        };
        Ok(Job { config, meta, out })
    }

    pub fn from_path(path: &Path, ov: &Overrides) -> Result<Self> {
        Self::new(ExperimentConfig::load(path)?, ov)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn prepare(&self) -> Result<()> {
        fs::create_dir_all(&self.out).map_err(|e| Error::io(&self.out, e))
    }

    /// Writes the metadata line, then whatever `body` emits.
    fn write_with_header(&self, name: &str, body: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<PathBuf> {
        let mut buf = self.meta.header_line().into_bytes();
        body(&mut buf)?;
        let path = self.path(name);
        fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        #[derive(Serialize)]
        struct Stamped<'a, T> {
            meta: &'a Metadata,
            #[serde(flatten)]
            body: &'a T,
        }
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(&Stamped { meta: &self.meta, body: value })?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

/// Skips the `#` metadata line when reading an artifact back.
pub fn csv_reader<R: std::io::Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveSummary {
    pub proxy: f64,
    pub max_vhat: f64,
    pub tail_start: usize,
    pub tail_v: f64,
    pub family: Vec<String>,
    pub per_state: Vec<StateTail>,
    /// State whose distribution went to `distribution.csv`.
    pub distribution_state: String,
    pub apriori_bound: f64,
}

/// `velocity.csv` (all states, all times), `distribution.csv` (first
/// state, all times) and `evolve_summary.json`.
pub fn run_evolve(job: &Job) -> Result<EvolveSummary> {
    let cfg = &job.config;
    let walk = cfg.walk(None)?;
    let family = cfg.states();
    let mut grid = cfg.t_grid()?;
    grid.sort_unstable();
    grid.dedup();
    let est: VelocityEstimate = observables::velocity_proxy(&walk, &family, &grid, cfg.tail_v)?;
    job.prepare()?;
    job.write_with_header("velocity.csv", |buf| est.write_csv(buf))?;

    let first = &family[0];
    let mut ev = Evolver::new(&walk, first.build()?);
    job.write_with_header("distribution.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        for &t in &grid {
            ev.advance_to(t);
            observables::PositionDistribution::from_state(ev.state(), t).write_csv_rows(&mut w)?;
        }
        w.flush().map_err(|e| Error::io("distribution.csv", e))?;
        Ok(())
    })?;

    let t_max = *grid.last().expect("validated non-empty grid");
    let summary = EvolveSummary {
        proxy: est.proxy,
        max_vhat: est.max_vhat(),
        tail_start: est.tail_start,
        tail_v: est.tail_v,
        family: est.family.clone(),
        per_state: est.per_state.clone(),
        distribution_state: first.id(),
        apriori_bound: bounds::apriori_bound(&walk.c1, &walk.c2, t_max + 8),
    };
    job.write_json("evolve_summary.json", &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoinBoundSummary {
    pub k: u8,
    pub classification: CaseClassification,
    pub gap_weighted: GapWeightedBound,
    /// `sup g · limsup |a(j_m)|`, meaningful in the bounded-gap case.
    pub uniform_gap_bound: f64,
    /// `(M, bound)` for shifted tails at `N = 1`.
    pub tail_shift: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonPoint {
    pub horizon: usize,
    /// Best over `N ≤ horizon/2` and both `k`.
    pub best: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsSummary {
    pub gap_stats: Option<GapStats>,
    /// Why the general bound was not evaluated, if it was not.
    pub j_membership: Option<String>,
    pub theorem: Option<BoundReport>,
    pub per_coin: Vec<CoinBoundSummary>,
    pub apriori_bound: f64,
    pub horizon_sweep: Vec<HorizonPoint>,
}

/// Largest `|n|` examined by the a priori estimate.
const APRIORI_CAP: i64 = 100_000;

/// `bounds.json` and `bounds.csv` (one row per `(k, N)`).
pub fn run_bounds(job: &Job) -> Result<BoundsSummary> {
    let cfg = &job.config;
    let seq = cfg.subsequence()?;
    let (c1, c2) = cfg.coins(None)?;
    let coins = [(1u8, &c1), (2u8, &c2)];

    // Failing J-membership is reported, not fatal.
    let stats = match bounds::gap_stats(&seq) {
        Ok(s) => Ok(s),
        Err(e @ (Error::InsufficientData { .. } | Error::NotInJ { .. })) => Err(e.to_string()),
        Err(e) => return Err(e),
    };
    let (theorem, j_membership) = match &stats {
        Ok(_) => {
            let inputs: Vec<BoundInput<'_>> =
                coins.iter().map(|&(k, c)| BoundInput { k, seq: &seq, coins: c, q: None }).collect();
            match bounds::theorem_general_bound(&inputs, cfg.n_range()) {
                Ok(r) => (Some(r), None),
                Err(e @ Error::NotInJ { .. }) => (None, Some(e.to_string())),
                Err(e) => return Err(e),
            }
        }
        Err(msg) => (None, Some(msg.clone())),
    };
    let q = stats.as_ref().map(GapStats::q).unwrap_or(0.0);

    let per_coin = coins
        .iter()
        .map(|&(k, c)| CoinBoundSummary {
            k,
            classification: bounds::classify(&seq, c),
            gap_weighted: bounds::gap_weighted_bound(&seq, c),
            uniform_gap_bound: bounds::uniform_gap_bound(&seq, c),
            tail_shift: bounds::tail_shift_sweep(&seq, c, q, 0..=8),
        })
        .collect();

    let reach = seq.j(seq.pos_horizon() as i64).max(-seq.j(-(seq.neg_horizon() as i64)));
    let apriori = bounds::apriori_bound(&c1, &c2, reach.clamp(2, APRIORI_CAP) as usize);

    let mut horizon_sweep = Vec::new();
    if stats.is_ok() {
        let h = seq.horizon();
        let mut hs: Vec<usize> = [h / 4, h / 2, h].into_iter().filter(|&x| x >= MIN_HORIZON).collect();
        hs.dedup();
        for hh in hs {
            let sub = seq.truncated(hh);
            let inputs: Vec<BoundInput<'_>> =
                coins.iter().map(|&(k, c)| BoundInput { k, seq: &sub, coins: c, q: None }).collect();
            if let Ok(r) = bounds::theorem_general_bound(&inputs, 0..=hh / 2) {
                horizon_sweep.push(HorizonPoint { horizon: hh, best: r.best.value });
            }
        }
    }

    let summary = BoundsSummary {
        gap_stats: stats.ok(),
        j_membership,
        theorem,
        per_coin,
        apriori_bound: apriori,
        horizon_sweep,
    };
    job.prepare()?;
    job.write_json("bounds.json", &summary)?;
    job.write_with_header("bounds.csv", |buf| match &summary.theorem {
        Some(r) => r.write_csv(buf),
        None => {
            buf.extend_from_slice(b"k,N,value,fk_plus,fk_minus,q,horizon,best\n");
            Ok(())
        }
    })?;
    Ok(summary)
}

/// `random_scan.csv` (one row per seed) and `random_summary.json`.
pub fn run_random_scan(job: &Job) -> Result<RandomExperimentReport> {
    let cfg = &job.config;
    let spec = cfg.random.as_ref().ok_or_else(|| Error::Schema { path: "random".into(), message: "missing".into() })?;
    if cfg.seeds.is_empty() {
        return Err(Error::Schema { path: "seeds".into(), message: "random-scan needs at least one seed".into() });
    }
    let mut exp = RandomExperiment::new(spec.distribution.build()?, cfg.seeds.clone(), spec.n_max, spec.t_max);
    exp.n_range = cfg.n_range();
    if let Some(states) = &cfg.states {
        exp.states = states.clone();
    }
    let report = random::random_zero_velocity_experiment(&exp)?;
    job.prepare()?;
    job.write_with_header("random_scan.csv", |buf| report.write_csv(buf))?;
    job.write_json("random_summary.json", &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseSummary {
    pub window: (i64, i64),
    pub k: u8,
    pub unitarity_l: f64,
    pub unitarity_m: f64,
    pub unitarity_w: f64,
    pub checks: Vec<CommutatorCheck>,
    pub max_diff: f64,
    pub max_offdiag: f64,
}

/// `dense.csv` (formula vs dense per `(kind, N)`), `dense_summary.json`
/// and optionally `l.csv`/`m.csv` matrix dumps.
pub fn run_dense_lab(job: &Job) -> Result<DenseSummary> {
    let cfg = &job.config;
    let spec = cfg.dense.clone().unwrap_or(crate::config::DenseSpec {
        n_values: vec![0, 1, 2, 3],
        k: 2,
        horizon: 6,
        dump_matrices: false,
    });
    let seq = cfg.subsequence()?.truncated(spec.horizon);
    let (c1, c2) = cfg.coins(None)?;
    let (active, other) = if spec.k == 1 { (&c1, &c2) } else { (&c2, &c1) };
    let window = dense::commutator_window(&seq)?;
    if window.len() > dense::SVD_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "window of {} CMV indices exceeds the dense limit {}; lower dense.horizon",
            window.len(),
            dense::SVD_LIMIT
        )));
    }
    let factors = CmvFactors { c1: c1.clone(), c2: c2.clone() };
    let t = dense::build_truncated(&factors, window);

    let mut checks = Vec::new();
    for kind in [ModifiedKind::Tilde, ModifiedKind::Hat] {
        for &n in &spec.n_values {
            checks.push(dense::check_commutator(&seq, active, other, kind, n, bounds::commutator_norm_formula)?);
        }
    }
    let summary = DenseSummary {
        window: (window.lo, window.hi),
        k: spec.k,
        unitarity_l: t.l.unitarity_defect(),
        unitarity_m: t.m.unitarity_defect(),
        unitarity_w: t.w.unitarity_defect(),
        max_diff: checks.iter().map(|c| c.diff).fold(0.0, f64::max),
        max_offdiag: checks.iter().map(|c| c.offdiag).fold(0.0, f64::max),
        checks,
    };
    job.prepare()?;
    job.write_with_header("dense.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        for c in &summary.checks {
            w.serialize(c)?;
        }
        w.flush().map_err(|e| Error::io("dense.csv", e))?;
        Ok(())
    })?;
    if spec.dump_matrices {
        job.write_with_header("l.csv", |buf| t.l.write_csv(buf))?;
        job.write_with_header("m.csv", |buf| t.m.write_csv(buf))?;
    }
    job.write_json("dense_summary.json", &summary)?;
    Ok(summary)
}

/// Runs the self-check suite; writes `validation.csv` when `out` is given.
pub fn run_validate(hooks: &Hooks, out: Option<&Path>) -> Result<Vec<CheckResult>> {
    let results = validation::run_all(hooks);
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("validation.csv");
        let mut buf = format!("# {TOOL} {VERSION}\n").into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            for r in &results {
                w.serialize(r)?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
        }
        let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        f.write_all(&buf).map_err(|e| Error::io(&path, e))?;
    }
    Ok(results)
}

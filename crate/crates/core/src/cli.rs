//! `qwalk-lab` command line.
//!
//! Exit codes: 0 success, 1 runtime error, 2 schema or usage error,
//! 3 validation failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::runner::{self, Job, Overrides};
use crate::validation::Hooks;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qwalk-lab", version, about = "Split-step quantum walk experiments with sparse reflectors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Comma-separated seeds; override the config.
    #[arg(long, global = true, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Subsequence horizon; overrides the config.
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Evolve the state family; write velocity and distribution CSVs.
    Evolve,
    /// Evaluate velocity bounds over (k, N).
    Bounds,
    /// Multi-seed random-coin experiment.
    RandomScan,
    /// Run the built-in cross-checks.
    Validate,
    /// Compare commutator formulas with dense truncated matrices.
    DenseLab,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Schema { .. } => EXIT_SCHEMA,
        _ => EXIT_ERROR,
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_SCHEMA } else { EXIT_OK };
        }
    };
    run_cli(&cli, &Hooks::default())
}

/// Runs a parsed command with the given validation hooks.
pub fn run_cli(cli: &Cli, hooks: &Hooks) -> i32 {
    let pool = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return EXIT_ERROR;
        }
    };
    pool.install(|| dispatch(cli, hooks))
}

fn dispatch(cli: &Cli, hooks: &Hooks) -> i32 {
    if let Command::Validate = cli.command {
        return match runner::run_validate(hooks, cli.out.as_deref()) {
            Ok(results) => {
                for r in &results {
                    println!("{}", r.line());
                }
                let failed = results.iter().filter(|r| !r.passed).count();
                println!("{} checks, {failed} failed", results.len());
                if failed == 0 { EXIT_OK } else { EXIT_VALIDATION }
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        };
    }
    let Some(config) = &cli.config else {
        eprintln!("error: --config is required for this subcommand");
        return EXIT_SCHEMA;
    };
    let ov = Overrides { out: cli.out.clone(), seeds: cli.seeds.clone(), horizon: cli.horizon };
    let result = Job::from_path(config, &ov).and_then(|job| execute(cli.command, &job));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(command: Command, job: &Job) -> crate::error::Result<()> {
    let out = job.out.display();
    match command {
        Command::Evolve => {
            let s = runner::run_evolve(job)?;
            println!("velocity proxy {:.6} (max v̂ {:.6}, a priori {:.6}) -> {out}", s.proxy, s.max_vhat, s.apriori_bound);
        }
        Command::Bounds => {
            let s = runner::run_bounds(job)?;
            match &s.theorem {
                Some(r) => println!("best bound {:.6e} at k={} N={} -> {out}", r.best.value, r.best.k, r.best.n),
                None => println!("general bound not evaluated: {}", s.j_membership.as_deref().unwrap_or("?")),
            }
            for c in &s.per_coin {
                println!("k={}: {}; gap-weighted {:.6e} ({})", c.k, c.classification.label, c.gap_weighted.value, c.gap_weighted.note);
            }
        }
        Command::RandomScan => {
            let r = runner::run_random_scan(job)?;
            println!(
                "{} seeds: median v̂ {:.6}, median bound {:.6e}, hypotheses hold on {:.0}%{} -> {out}",
                r.outcomes.len(),
                r.median_vhat,
                r.median_bound,
                100.0 * r.hypotheses_fraction,
                if r.conclusive { "" } else { " (inconclusive)" }
            );
        }
        Command::DenseLab => {
            let s = runner::run_dense_lab(job)?;
            println!(
                "window [{}, {}]: max |formula − dense| {:.3e}, off-diagonal {:.3e} -> {out}",
                s.window.0, s.window.1, s.max_diff, s.max_offdiag
            );
        }
        Command::Validate => unreachable!("handled in dispatch"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_global_flags() {
        let cli = Cli::try_parse_from(["qwalk-lab", "bounds", "--config", "c.json", "--seeds", "1,2,3", "--horizon", "40", "--threads", "2"]).unwrap();
        assert_eq!(cli.seeds, Some(vec![1, 2, 3]));
        assert_eq!(cli.horizon, Some(40));
        assert!(matches!(cli.command, Command::Bounds));
    }

    #[test]
    fn missing_config_is_usage_error() {
        assert_eq!(run(["qwalk-lab", "evolve"]), EXIT_SCHEMA);
        assert_eq!(run(["qwalk-lab", "frobnicate"]), EXIT_SCHEMA);
    }
}

//! Drives the CLI pipelines from a config file, as `qwalk-lab` does.
//!
//! cargo run --example run_config -- configs/case_one.json out/case_one

use std::path::Path;

use qwalk_lab::runner::{run_bounds, run_evolve, Job, Overrides};

fn main() {
    let mut args = std::env::args().skip(1);
    let config = args.next().unwrap_or_else(|| "configs/case_one.json".into());
    let out = args.next().unwrap_or_else(|| "out/example".into());
    let job = Job::from_path(Path::new(&config), &Overrides { out: Some(out.into()), ..Default::default() })
        .unwrap_or_else(|e| {
            eprintln!("{e}");
            std::process::exit(2);
        });
    println!("{}", job.meta.header_line().trim_end());
    if job.config.t_grid.is_some() {
        let s = run_evolve(&job).unwrap();
        println!("velocity proxy {:.4} over {:?}", s.proxy, s.family);
    }
    if job.config.subsequence.is_some() {
        let b = run_bounds(&job).unwrap();
        if let Some(t) = &b.theorem {
            println!("best bound {:.3e} (k = {}, N = {})", t.best.value, t.best.k, t.best.n);
        }
        for p in &b.horizon_sweep {
            println!("  horizon {:>4}: {:.3e}", p.horizon, p.best);
        }
    }
    println!("artifacts in {}", job.out.display());
}

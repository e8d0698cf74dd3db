//! `soupfall`: run one estimator from a JSON config and write its outputs.

mod commands;
mod config;
mod output;

use anyhow::Result;
use clap::Parser;
use config::{Command, ConfigError, RunConfig};
use output::{sha256_hex, OutDir};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

const SEED_ENV: &str = "SOUPFALL_SEED";

#[derive(Parser, Debug)]
#[command(name = "soupfall", version, about = "Monte Carlo estimators for scale-invariant curve soups")]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides SOUPFALL_SEED and the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; overrides `out_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Reads the config and applies overrides: flag, then environment, then file.
fn resolve(args: &Args) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| ConfigError(format!("reading {}: {e}", args.config.display())))?;
    let mut cfg = RunConfig::from_json(&text)?;
    cfg.command()?;
    if let Some(s) = args.seed {
        cfg.seed = Some(s);
    } else if let Ok(v) = std::env::var(SEED_ENV) {
        let s = v
            .trim()
            .parse()
            .map_err(|_| ConfigError(format!("{SEED_ENV} must be an unsigned 64-bit integer, got {v:?}")))?;
        cfg.seed = Some(s);
    }
    cfg.seed.get_or_insert(0);
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    if args.out.is_some() {
        cfg.out_dir = args.out.clone();
    }
    if cfg.threads == Some(0) {
        return Err(ConfigError("invalid `threads`: must be ≥ 1".into()));
    }
    if cfg.out_dir.is_none() && cfg.command != Some(Command::Cle) {
        return Err(ConfigError("missing field `out_dir` (or pass --out)".into()));
    }
    Ok(cfg)
}

fn run(cfg: &RunConfig) -> Result<()> {
    let start = Instant::now();
    let mut out = match &cfg.out_dir {
        Some(dir) => OutDir::create(dir)?,
        None => OutDir::discard(),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        pool = pool.num_threads(n);
    }
    let result = pool.build()?.install(|| commands::dispatch(cfg, &mut out))?;

    let echo = serde_json::to_value(cfg)?;
    // where and how wide the run went does not change its results
    let input = RunConfig {
        out_dir: None,
        threads: None,
        ..cfg.clone()
    };
    if cfg.command == Some(Command::Cle) {
        println!("{}", serde_json::to_string(&result)?);
    }
    // the summary carries no wall time, so identical configs give identical files
    out.write_json(
        "summary.json",
        &json!({
            "command": cfg.command,
            "seed": cfg.seed,
            "input_sha256": sha256_hex(serde_json::to_string(&input)?.as_bytes()),
            "result": result,
        }),
    )?;
    out.finish(|files| {
        json!({
            "config": echo,
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time_s": start.elapsed().as_secs_f64(),
            "files": files,
        })
    })
}

/// Precondition violations are configuration errors; the rest are failures of the run.
fn exit_code(e: &anyhow::Error) -> u8 {
    use soupfall::Error as E;
    if e.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<E>() {
        Some(
            E::InvalidCurve(_)
            | E::InvalidScale(_)
            | E::InvalidDomain(_)
            | E::InvalidSpec(_)
            | E::Resolution { .. }
            | E::InvalidArgument { .. },
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match resolve(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("soupfall: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("soupfall: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

//! Command-line front end: sum-CDF envelopes and finite-blocklength bound
//! curves, written as CSV or JSON.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod run;

use std::path::PathBuf;

use clap::Parser;

use crate::config::{Command, Format, PartialConfig, RunConfig};
use crate::error::CliError;
use crate::presets::Preset;
use crate::run::Report;

#[derive(Debug, Clone, Parser)]
#[command(name = "certbound", version, about = "Saddlepoint approximations with certified error bounds")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML run configuration. Values override the preset, if one is given.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Worker threads (default: one per core). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Overrides the Monte Carlo seed of the `[mc]` section.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Builds the validated configuration from the command line, preset and file.
pub fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let (file, src) = match &cli.config {
        Some(path) => {
            let src = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
            (config::parse(&src)?, Some(src))
        }
        None => (PartialConfig::default(), None),
    };
    if cli.config.is_none() && cli.preset.is_none() {
        return Err(CliError::Config("nothing to run: pass --config, --preset, or both".into()));
    }
    let mut merged = match cli.preset {
        Some(p) => p.partial().overlay(&file),
        None => file,
    };

    let from_preset = cli.preset.and_then(|p| p.partial().command);
    let wanted = match cli.command {
        Command::Figure => {
            let p = cli.preset.ok_or_else(|| CliError::Config("figure needs --preset".into()))?;
            from_preset.ok_or_else(|| CliError::Config(format!("preset {} has no command", p.name())))?
        }
        c => c,
    };
    if let (Some(p), Some(pc)) = (cli.preset, from_preset) {
        if pc != wanted {
            return Err(CliError::Config(format!("preset {} runs {pc:?}, not {wanted:?}", p.name())));
        }
    }
    if let Some(c) = merged.command {
        if c != wanted && c != Command::Figure {
            return Err(CliError::Config(format!("config asks for {c:?} but the command line asks for {wanted:?}")));
        }
    }
    merged.command = Some(wanted);

    let mut cfg = config::resolve(&merged, cli.preset, src.as_deref())?;
    if let Some(out) = &cli.out {
        cfg.output.path = Some(out.clone());
    }
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    if let (Some(seed), Some(mc)) = (cli.seed, cfg.mc.as_mut()) {
        mc.seed = seed;
    }
    if cli.threads == Some(0) {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    Ok(cfg)
}

/// Runs a configuration on a pool of `threads` workers (or the global pool).
pub fn execute(cfg: &RunConfig, threads: Option<usize>) -> Result<Report, CliError> {
    match threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Numeric(format!("starting {k} threads: {e}")))?
            .install(|| run::run(cfg)),
        None => run::run(cfg),
    }
}

/// Full command-line flow. Returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    match try_main(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("certbound: {e}");
            e.exit_code()
        }
    }
}

fn try_main(cli: &Cli) -> Result<i32, CliError> {
    let cfg = load(cli)?;
    let report = execute(&cfg, cli.threads)?;
    let text = output::render(&report.output, cfg.output.format)?;
    match &cfg.output.path {
        Some(path) => output::write_atomic(path, &text)?,
        None => print!("{text}"),
    }
    for w in &report.warnings {
        eprintln!("certbound: warning: {w}");
    }
    for f in &report.failures {
        eprintln!("certbound: row failed: {f}");
    }
    Ok(if report.failures.is_empty() { 0 } else { 3 })
}

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use dircomplex_cli::{config, error_record, run, write_artifacts, Command, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(name = "dircomplex", version, about = "Directional complexity experiments for Z^q-actions")]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    /// JSON config, or a manifest from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Root seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; overrides the config (default `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads.
    #[arg(long, global = true, env = "DIRCOMPLEX_WORKERS")]
    workers: Option<usize>,

    /// Branch-and-bound node budget per cover; overrides the config.
    #[arg(long = "exact-cap", global = true)]
    exact_cap: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Sub {
    /// Topological spanning numbers along every configured direction.
    Span,
    /// Measure spanning numbers along every configured direction.
    MeasureSpan,
    /// Equicontinuity moduli on close pairs.
    Equicont,
    /// Base versus suspension mean complexity.
    Suspend,
    /// Orbit covers of test functions in empirical L².
    Spectral,
    /// Measure complexity across a β grid.
    Sweep,
    /// Every probe on the reference systems against known answers.
    ZooCheck,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Command {
        match s {
            Sub::Span => Command::Span,
            Sub::MeasureSpan => Command::MeasureSpan,
            Sub::Equicont => Command::Equicont,
            Sub::Suspend => Command::Suspend,
            Sub::Spectral => Command::Spectral,
            Sub::Sweep => Command::Sweep,
            Sub::ZooCheck => Command::ZooCheck,
        }
    }
}

fn execute(cli: Cli) -> Result<PathBuf> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("building worker pool")?;
    }
    let mut config = match &cli.config {
        Some(path) => config::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(cap) = cli.exact_cap {
        config.exact_cap = cap;
    }
    let out = cli.out.or_else(|| config.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let command = Command::from(cli.command);
    let artifacts = run(command, &config)?;
    write_artifacts(&out, command, &config, &artifacts)?;
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(out) => {
            println!("{}", out.join("manifest.json").display());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", error_record(&err));
            ExitCode::FAILURE
        }
    }
}

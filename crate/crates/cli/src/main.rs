use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use scdd_cli::commands::{self, NetworkSource};
use scdd_cli::config::{Overrides, PipelineConfig};
use scdd_cli::error::CliError;

fn version() -> String {
    format!(
        "{} (network format {})",
        env!("CARGO_PKG_VERSION"),
        scdd_core::netgen::FORMAT_VERSION
    )
}

/// Synthetic firm-level supply networks and supply-chain risk indicators.
#[derive(Parser)]
#[command(name = "scdd", version = version(), about)]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true, default_value = "scdd.toml")]
    config: PathBuf,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Fraction of the firm population to sample, in (0, 1].
    #[arg(long, global = true)]
    scale: Option<f64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Network file (default: <out>/network.scdn).
    #[arg(long)]
    network: Option<PathBuf>,
    /// Node table written with the network (default: firms.csv next to it).
    #[arg(long)]
    firms: Option<PathBuf>,
}

impl From<Source> for NetworkSource {
    fn from(s: Source) -> Self {
        NetworkSource {
            network: s.network,
            firms: s.firms,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load and check the inputs, write normalized tables.
    Ingest,
    /// Sample firms, degree targets and ROW dummies.
    Sample,
    /// Build the supply network.
    Build,
    /// Tier-k risk reports on an existing network.
    Risk(Source),
    /// Exposure matrices and monitoring statistics on an existing network.
    Exposure(Source),
    /// Run every stage.
    Run,
    /// Validation diagnostics for an existing network.
    Validate(Source),
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let overrides = Overrides {
        seed: cli.seed,
        scale: cli.scale,
        threads: cli.threads,
        out: cli.out,
    };
    let cfg = PipelineConfig::load(&cli.config, &overrides)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.threads)
        .build_global()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    let m = match cli.command {
        Command::Ingest => commands::cmd_ingest(&cfg)?,
        Command::Sample => commands::cmd_sample(&cfg)?,
        Command::Build => commands::cmd_build(&cfg)?,
        Command::Run => commands::cmd_run(&cfg)?,
        Command::Risk(s) => commands::cmd_risk(&cfg, &s.into())?,
        Command::Exposure(s) => commands::cmd_exposure(&cfg, &s.into())?,
        Command::Validate(s) => commands::cmd_validate(&cfg, &s.into())?,
    };
    log::info!(
        "{} finished: {} outputs in {}",
        m.command,
        m.outputs.len(),
        cfg.run.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! `subthz` — configuration-driven downlink campaign runner.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;

use subthz_cli::sweep::{run_sweep, FigureKind, SweepOptions};
use subthz_sim::config::SimConfig;

/// Sub-THz downlink campaign runner: statistical channel drops, planar-array
/// beamforming, SNR-driven link adaptation and a HARQ/RLC slot engine,
/// swept over scenarios, conditions, antenna pairings and offered rates.
#[derive(Debug, Parser)]
#[command(name = "subthz", version)]
struct Cli {
    /// Campaign configuration file; the embedded defaults apply when omitted.
    #[arg(long, env = "SUBTHZ_CONFIG")]
    config: Option<PathBuf>,

    /// Output directory for campaign results, figures and tables.
    #[arg(long, env = "SUBTHZ_OUT", default_value = "out")]
    out: PathBuf,

    /// Override the per-campaign realization count.
    #[arg(long, env = "SUBTHZ_REALIZATIONS")]
    realizations: Option<usize>,

    /// Override the master seed.
    #[arg(long, env = "SUBTHZ_SEED")]
    seed: Option<u64>,

    /// Worker threads per campaign; defaults to the available cores.
    #[arg(long, env = "SUBTHZ_WORKERS")]
    workers: Option<usize>,

    /// Artifact families to emit (repeatable); everything when omitted.
    #[arg(
        long = "figure",
        env = "SUBTHZ_FIGURE",
        value_enum,
        value_delimiter = ','
    )]
    figure: Vec<FigureKind>,

    /// Also write a per-slot trace CSV for realization 0 of each campaign.
    #[arg(long, env = "SUBTHZ_TRACE")]
    trace: bool,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(path) => SimConfig::from_path(path)
            .with_context(|| format!("loading config {}", path.display()))?,
        None => SimConfig::default(),
    };
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let opts = SweepOptions {
        realizations: cli.realizations,
        master_seed: cli.seed,
        workers,
        figures: cli.figure,
        trace: cli.trace,
    };
    let outcome = run_sweep(&cfg, &cli.out, &opts)?;
    println!(
        "{} campaigns, {} realization rows, {} artifacts under {}",
        outcome.campaigns,
        outcome.realization_rows,
        outcome.artifacts.len(),
        outcome.out_dir.display()
    );
    Ok(())
}

//! Experiment runner for `nodal-transport`.
//!
//! Every subcommand writes `results.csv` and `manifest.json` (plus optional
//! JSON dumps) to `--out`. Files are written only after the whole run has
//! succeeded. Failures print one line to stderr and exit nonzero.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "nodal-transport",
    version,
    about = "Transport cost and nodal sets: experiment runner"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct GlobalArgs {
    /// Output directory.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
    /// Base random seed.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    parallel: Option<usize>,
    /// JSON config file; flags override its entries.
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Uncertainty product over a corpus of grid functions.
    VerifyGrid(commands::VerifyGridArgs),
    /// Cube decomposition at a given or the critical scale.
    ProofTrace(commands::ProofTraceArgs),
    /// Scaling sweep over the bump family.
    Extremal(commands::ExtremalArgs),
    /// Transport and nodal-set scaling for band-limited functions.
    Spectral(commands::SpectralArgs),
    /// Transport, boundary and product for a function on a graph.
    Graph(commands::GraphArgs),
    /// Verify, search or compare graphical designs.
    Designs(commands::DesignsArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace(['\n', '\r'], " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = config::ConfigFile::load(cli.global.config.as_deref())?;
    let global: config::Global = file.merge_global(&cli.global)?;
    if let Some(threads) = global.parallel {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| anyhow::anyhow!("thread pool: {e}"))?;
    }
    let run = match cli.command {
        Command::VerifyGrid(a) => commands::verify_grid(&global, file.merge(&a)?)?,
        Command::ProofTrace(a) => commands::proof_trace(&global, file.merge(&a)?)?,
        Command::Extremal(a) => commands::extremal(&global, file.merge(&a)?)?,
        Command::Spectral(a) => commands::spectral(&global, file.merge(&a)?)?,
        Command::Graph(a) => commands::graph(&global, file.merge(&a)?)?,
        Command::Designs(a) => commands::designs(&global, file.merge(&a)?)?,
    };
    output::emit(&global, &file, run)?;
    Ok(())
}

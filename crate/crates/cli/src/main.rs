//! `kgr`: pseudospectral simulator and soliton-resolution classifier for the
//! damped focusing Klein-Gordon equation on a periodic box.

mod config;
mod run;
mod sweep;

use anyhow::Result;
use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "kgr", version, about = "damped Klein-Gordon soliton-resolution harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an equilibrium profile and save it as a DKGQ file.
    GroundState {
        #[arg(long, default_value_t = 1)]
        dimension: usize,
        #[arg(long, default_value_t = 3.0)]
        exponent: f64,
        #[arg(long, default_value_t = 0)]
        nodes: usize,
        /// shoot | petviashvili | closed-form
        #[arg(long, default_value = "shoot")]
        method: String,
        /// Grid used by the petviashvili method.
        #[arg(long, default_value_t = 512)]
        points: usize,
        #[arg(long, default_value_t = 30.0)]
        half_length: f64,
        /// Output file path.
        #[arg(long, default_value = "ground.dkgq")]
        out: PathBuf,
    },
    /// Run a scenario from a config file.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the perturbation seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Localization diagnostics of a saved checkpoint.
    Diagnose {
        checkpoint: PathBuf,
        /// Exterior-energy radius around detected centers.
        #[arg(long, default_value_t = 10.0)]
        radius: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decompose a saved checkpoint into translated equilibria.
    Resolve {
        checkpoint: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the parameter sweep declared in the config's [sweep] section.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: one per core).
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::GroundState { dimension, exponent, nodes, method, points, half_length, out } => {
            let profile =
                run::ground_state(dimension, exponent, nodes, &method, points, half_length, &out)?;
            println!(
                "wrote {} (d={}, p={}, nodes={}, Q(0)={:.8}, residual={:.3e})",
                out.display(),
                profile.dimension,
                profile.exponent,
                profile.node_count,
                profile.central_value(),
                profile.residual
            );
        }
        Command::Evolve { config, out, seed } => {
            let spec = config::load(&config, out.as_deref(), seed)?;
            let summary = run::run_scenario(&spec)?;
            println!(
                "{}: {} samples to t = {}, verdict written to {}",
                summary.name,
                summary.samples,
                summary.final_time,
                spec.output.dir.join("verdict.toml").display()
            );
        }
        Command::Diagnose { checkpoint, radius, out } => {
            let text = run::diagnose_checkpoint(&checkpoint, radius, out.as_deref())?;
            print!("{text}");
        }
        Command::Resolve { checkpoint, out } => {
            let text = run::resolve_checkpoint(&checkpoint, out.as_deref())?;
            print!("{text}");
        }
        Command::Sweep { config, out, seed, workers } => {
            let spec = config::load(&config, out.as_deref(), seed)?;
            let dir = spec.output.dir.clone();
            let table = sweep::run_sweep(&spec, &dir, workers)?;
            println!("{} rows -> {}", table.lines().count().saturating_sub(1), dir.display());
        }
    }
    Ok(())
}

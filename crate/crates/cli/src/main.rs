use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use relapse::PresetName;
use relapse_cli::commands::{self, Outcome};
use relapse_cli::config::{self, RunConfig, DEFAULT_TOL};

/// Age-structured relapse model: thresholds, endemic states, bifurcation
/// diagrams and transport simulations.
#[derive(Parser)]
#[command(name = "relapse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `[output] dir`; default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Solver tolerance (overrides `[solver] tol`).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// R0, RC, the dominant root λ* and the threshold region.
    Thresholds(Common),
    /// Run the transport solver on the configured grid.
    Simulate(Common),
    /// Endemic steady states.
    Steady(Common),
    /// Endemic branches over the `[sweep]` values.
    Bifurcation(Common),
    /// Run a bundled experiment.
    Preset {
        /// extinction, bistable-high, bistable-low, endemic or agedep
        name: PresetName,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
}

fn prepare(common: &Common) -> Result<(RunConfig, PathBuf)> {
    let mut cfg = config::load(&common.config).with_context(|| format!("in {}", common.config.display()))?;
    if let Some(tol) = common.tol {
        anyhow::ensure!(tol > 0.0, "--tol must be > 0, got {tol}");
        cfg.tol = tol;
    }
    let out = common
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| Path::new("out").to_path_buf());
    Ok((cfg, out))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let outcome: Outcome = match &cli.command {
        Command::Thresholds(c) => {
            let (cfg, out) = prepare(c)?;
            commands::thresholds(&cfg, &out)?
        }
        Command::Simulate(c) => {
            let (cfg, out) = prepare(c)?;
            commands::simulate_run(&cfg, &out)?
        }
        Command::Steady(c) => {
            let (cfg, out) = prepare(c)?;
            commands::steady(&cfg, &out)?
        }
        Command::Bifurcation(c) => {
            let (cfg, out) = prepare(c)?;
            commands::bifurcation(&cfg, &out)?
        }
        Command::Preset { name, out, tol } => {
            anyhow::ensure!(*tol > 0.0, "--tol must be > 0, got {tol}");
            commands::run_preset(*name, out, *tol)?
        }
    };
    print!("{}", outcome.summary);
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

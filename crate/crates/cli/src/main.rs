mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use horizonlab::par::Execution;
use serde_json::json;

use config::ConfigError;
use output::OutputDir;

#[derive(Parser)]
#[command(name = "horizonlab", version, about = "Horizons, null flows and scalar waves on de Sitter black holes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config, or a manifest from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "HORIZONLAB_OUT", default_value = "horizonlab-out")]
    out: PathBuf,
    /// Dot-path override, e.g. `--set params.charge=0.3`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads for scans; 1 runs sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Horizon radii, surface gravities, thresholds and trapping data.
    Params,
    /// One null ray of the rescaled Hamilton flow.
    Flow,
    /// A mode on the exterior between the event and cosmological horizons.
    EvolveExterior,
    /// A mode in the block between the event and Cauchy horizons.
    EvolveInterior,
    /// Decay, Prony or power-law fit of a CSV column.
    Fit,
    /// Horizon table (and optionally decay fits) over lists of Λ, Q, a and ℓ.
    Scan,
    /// Exterior run, horizon tail, interior run and fits.
    Pipeline,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Params => "params",
            Command::Flow => "flow",
            Command::EvolveExterior => "evolve-exterior",
            Command::EvolveInterior => "evolve-interior",
            Command::Fit => "fit",
            Command::Scan => "scan",
            Command::Pipeline => "pipeline",
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = config::load(cli.config.as_deref(), &cli.overrides)?;
    let exec = match cli.jobs {
        Some(0) => return Err(ConfigError::at("--jobs", "must be positive").into()),
        Some(1) => Execution::Sequential,
        Some(n) => {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    let mut out = OutputDir::create(&cli.out)?;
    let summary = match cli.command {
        Command::Params => commands::params(&cfg, &mut out)?,
        Command::Flow => commands::flow(&cfg, &mut out)?,
        Command::EvolveExterior => commands::evolve_exterior(&cfg, &mut out)?,
        Command::EvolveInterior => commands::evolve_interior(&cfg, &mut out)?,
        Command::Fit => commands::fit(&cfg, &mut out)?,
        Command::Scan => commands::scan(&cfg, &mut out, exec)?,
        Command::Pipeline => commands::pipeline(&cfg, &mut out)?,
    };
    let dir = out.path().display().to_string();
    out.finish(cli.command.name(), &cfg, summary)?;
    println!("{}: artifacts in {dir}", cli.command.name());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let report = match err.downcast_ref::<ConfigError>() {
                Some(c) => json!({ "error": { "kind": "config", "path": c.path, "message": c.message } }),
                None => {
                    let chain: Vec<String> = err.chain().map(|e| e.to_string()).collect();
                    json!({ "error": { "kind": "computation", "path": null, "message": chain.join(": ") } })
                }
            };
            let code = if report["error"]["kind"] == "config" { 2 } else { 1 };
            eprintln!("{report}");
            ExitCode::from(code)
        }
    }
}

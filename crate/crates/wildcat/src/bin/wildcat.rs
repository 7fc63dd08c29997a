//! Command-line interface: solve the value surface, extract the frontier,
//! simulate paths or ensembles, and validate a solve against the model's
//! structural properties.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use wildcat::commands;
use wildcat::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "wildcat",
    version,
    about = "Optimal exploration of an exhaustible resource with stochastic discoveries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the value surface and export it with the critical frontier
    Solve(CommonArgs),
    /// Solve and export only the critical frontier and critical prices
    Frontier(CommonArgs),
    /// Simulate one optimal-strategy path (events and sampled series)
    Simulate(CommonArgs),
    /// Run a seeded ensemble and export time-gridded statistics
    Ensemble(CommonArgs),
    /// Check a solve against the model's structural properties
    Validate(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the run configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output.dir from the configuration)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override simulation.base_seed
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress progress output
    #[arg(long)]
    quiet: bool,
}

impl CommonArgs {
    fn load(&self) -> wildcat::Result<RunConfig> {
        let mut config = RunConfig::from_file(&self.config)?;
        if let Some(seed) = self.seed {
            config.simulation.base_seed = seed;
        }
        if let Some(out) = &self.out {
            config.output.dir = out.display().to_string();
        }
        Ok(config)
    }
}

fn run(cli: Cli) -> wildcat::Result<bool> {
    let args = match &cli.command {
        Command::Solve(a)
        | Command::Frontier(a)
        | Command::Simulate(a)
        | Command::Ensemble(a)
        | Command::Validate(a) => a,
    };
    let config = args.load()?;
    let out_dir = PathBuf::from(&config.output.dir);
    match cli.command {
        Command::Solve(_) => {
            commands::cmd_solve(&config, &out_dir, args.quiet)?;
        }
        Command::Frontier(_) => {
            commands::cmd_frontier(&config, &out_dir, args.quiet)?;
        }
        Command::Simulate(_) => {
            commands::cmd_simulate(&config, &out_dir, args.quiet)?;
        }
        Command::Ensemble(_) => {
            commands::cmd_ensemble(&config, &out_dir, args.quiet)?;
        }
        Command::Validate(_) => {
            let report = commands::cmd_validate(&config, &out_dir, args.quiet)?;
            return Ok(report.all_pass);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(err) => {
            // machine-readable error on stderr
            eprintln!("{}", serde_json::json!({ "error": err.to_string() }));
            ExitCode::FAILURE
        }
    }
}

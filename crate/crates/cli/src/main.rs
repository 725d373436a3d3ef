//! `qdecay`: exact and approximate reduced dynamics of a decaying qubit.

mod config;
mod error;
mod output;
mod report;
mod scenario;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{GridOverride, Method, ScenarioConfig};
use error::CliError;
use report::ComparisonReport;
use scenario::{run_methods, Shared};

const DEFAULT_OUT: &str = "qdecay-out";

#[derive(Parser)]
#[command(
    name = "qdecay",
    version,
    about = "Exact, time-local and memory-kernel dynamics of qubit decay"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured method and write trajectories, kernel, rates and report.
    Simulate(Common),
    /// Write the exact memory kernel.
    Kernel(Common),
    /// Write the exact TCL rates with their order-2 and order-4 truncations.
    TclRates(Common),
    /// Check the invariants of the scenario; exit 1 if any fails.
    Verify(Common),
    /// Run at least two methods and write only the comparison report.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario: lorentzian-weak, lorentzian-strong or lorentzian-verystrong.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid step override.
    #[arg(long)]
    h: Option<f64>,
    /// End time override.
    #[arg(long = "t-end")]
    t_end: Option<f64>,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig, CliError> {
        let overrides = GridOverride {
            h: self.h,
            t_end: self.t_end,
        };
        match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::config(None, format!("cannot read {}: {e}", path.display()))
                })?;
                ScenarioConfig::from_json_with(&text, overrides)
            }
            (None, Some(name)) => {
                let mut config = ScenarioConfig::preset(name)?;
                overrides.apply(&mut config);
                config
                    .validate()
                    .map_err(|(_, msg)| CliError::config(None, msg))?;
                Ok(config)
            }
            (None, None) => unreachable!("clap enforces a source"),
        }
    }

    fn out_dir(&self, config: &ScenarioConfig) -> Result<PathBuf, CliError> {
        let dir = self
            .out
            .clone()
            .or_else(|| config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        std::fs::create_dir_all(&dir)?;
        Ok(dir)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qdecay: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(args) => simulate(&args),
        Command::Kernel(args) => {
            let config = args.load()?;
            let shared = Shared::new(&config)?;
            output::write_kernel(&args.out_dir(&config)?, &shared.exact_kernel()?)?;
            Ok(())
        }
        Command::TclRates(args) => {
            let config = args.load()?;
            let shared = Shared::new(&config)?;
            write_rates(&args.out_dir(&config)?, &shared, &[2, 4])
        }
        Command::Verify(args) => verify(&args),
        Command::Compare(args) => {
            let config = args.load()?;
            if config.methods.len() < 2 {
                return Err(CliError::config(
                    None,
                    "compare needs at least two methods".into(),
                ));
            }
            let shared = Shared::new(&config)?;
            let trajectories = run_methods(&shared, &config)?;
            let report = ComparisonReport::build(&shared, &trajectories)?;
            output::write_report(&args.out_dir(&config)?, &report.to_json())?;
            Ok(())
        }
    }
}

fn simulate(args: &Common) -> Result<(), CliError> {
    let config = args.load()?;
    let shared = Shared::new(&config)?;
    let trajectories = run_methods(&shared, &config)?;
    let dir = args.out_dir(&config)?;
    for traj in &trajectories {
        output::write_trajectory(&dir, &shared.grid, traj)?;
    }
    output::write_kernel(&dir, &shared.exact_kernel()?)?;
    let orders: Vec<usize> = [(Method::TclOrder2, 2), (Method::TclOrder4, 4)]
        .into_iter()
        .filter(|(m, _)| config.methods.contains(m))
        .map(|(_, o)| o)
        .collect();
    write_rates(&dir, &shared, &orders)?;
    let report = ComparisonReport::build(&shared, &trajectories)?;
    output::write_report(&dir, &report.to_json())?;
    Ok(())
}

fn write_rates(dir: &Path, shared: &Shared, orders: &[usize]) -> Result<(), CliError> {
    let truncated = orders
        .iter()
        .map(|&o| Ok((o, shared.tcl_truncated(o)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    output::write_rates(dir, &shared.tcl, &truncated)?;
    Ok(())
}

fn verify(args: &Common) -> Result<(), CliError> {
    let config = args.load()?;
    let shared = Shared::new(&config)?;
    let trajectories = run_methods(&shared, &config)?;
    let checks = verify::run_checks(&config, &shared, &trajectories)?;
    let mut failed = Vec::new();
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        println!(
            "{status} {}: residual {:e} (tolerance {:e})",
            c.name, c.residual, c.tolerance
        );
        if !c.passed() {
            failed.push(c.name.to_string());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Checks(failed))
    }
}

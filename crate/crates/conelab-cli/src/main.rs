//! conelab: laboratory runs over the half-plane cone fields.

mod commands;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Failure, Outputs};
use scenario::Scenario;

#[derive(Parser)]
#[command(
    name = "conelab",
    version,
    about = "Null characteristics, past sets and future boundary atlases of half-plane cone fields"
)]
struct Cli {
    /// Scenario file (JSON); defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the scenario's out_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Integrator tolerance override.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Sampling seed override (oracle and cloud runs).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the rightward generator family and export the curves.
    Curves,
    /// Build the three boundary atlases with relation matrices.
    Boundary,
    /// Profile the induced boundary maps along the nested chain.
    Jmap {
        /// Source metric for a custom single-map run (unit | strain | narrow).
        #[arg(long, requires = "target")]
        source: Option<String>,
        /// Target metric for a custom single-map run.
        #[arg(long, requires = "source")]
        target: Option<String>,
    },
    /// Map the configured point cloud and curve family into the flat target
    /// region.
    Confmap,
    /// Cross-validate the chronology against the lattice oracle.
    OracleCheck,
    /// Run the full verification suite and write the report.
    Verify,
}

fn load_scenario(cli: &Cli) -> Result<Scenario, Failure> {
    let mut scenario: Scenario = match &cli.config {
        None => Scenario::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::Config(format!("invalid scenario: {e}")))?
        }
    };
    if let Some(tol) = cli.tol {
        scenario.tol = tol;
    }
    if let Some(seed) = cli.seed {
        scenario.oracle.seed = seed;
        scenario.cloud.seed = seed;
    }
    if let Some(out) = &cli.out {
        scenario.out_dir = out.display().to_string();
    }
    scenario.validate().map_err(Failure::Config)?;
    Ok(scenario)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let scenario = load_scenario(cli)?;
    let out_dir = PathBuf::from(&scenario.out_dir);
    let outputs = Outputs::new(&out_dir, &scenario)?;
    match &cli.command {
        Command::Curves => commands::cmd_curves(&scenario, &outputs),
        Command::Boundary => commands::cmd_boundary(&scenario, &outputs),
        Command::Jmap { source, target } => commands::cmd_jmap(
            &scenario,
            &outputs,
            source.as_deref(),
            target.as_deref(),
        ),
        Command::Confmap => commands::cmd_confmap(&scenario, &outputs),
        Command::OracleCheck => commands::cmd_oracle_check(&scenario, &outputs),
        Command::Verify => commands::cmd_verify(&scenario, &outputs),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}

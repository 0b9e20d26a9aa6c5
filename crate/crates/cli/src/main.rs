use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dephtomo_cli::{commands, CliError, Outcome};

#[derive(Parser, Debug)]
#[command(name = "dephtomo", version, about = "State tomography under phase-damping channels")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check positivity, unit diagonal and D(0) = J over the probe grid
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Extract a constant basis and report per-sample residuals
    Decompose {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Simulate (or read) a record and reconstruct the initial state
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Measurement record CSV to write
        #[arg(long)]
        record_out: Option<PathBuf>,
        /// Report JSON to write; printed to stdout when absent
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Qubit dephasing walkthrough with the closed-form inverse
    DemoDephasing {
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long = "t", allow_negative_numbers = true)]
        t: f64,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result: Result<Outcome, CliError> = match &args.command {
        Command::Validate { scenario } => commands::validate(scenario),
        Command::Decompose { scenario } => commands::decompose(scenario),
        Command::Run { scenario, record_out, report_out } => {
            commands::run(scenario, record_out.as_deref(), report_out.as_deref())
        }
        Command::DemoDephasing { gamma, t, json } => commands::demo_dephasing(*gamma, *t, *json),
    };
    match result {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            for line in &outcome.stderr {
                eprintln!("{line}");
            }
            ExitCode::from(outcome.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

use std::process::ExitCode;

use clap::Parser;
use noisemagic_cli::commands::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let line = std::env::args().collect::<Vec<_>>().join(" ");
    match execute(&cli.command, &line) {
        Ok(outcome) => {
            for l in &outcome.report {
                println!("{l}");
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("validation failed");
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use eqpsg_cli::{run, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(report.render(cli.format).as_bytes()).is_err() {
                return ExitCode::FAILURE;
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e @ CliError::Usage(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    match qosd_cli::run(qosd_cli::Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

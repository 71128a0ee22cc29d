use std::process::ExitCode;

use clap::Parser;
use oscerr_cli::commands::{run, Cli, StrictFailure};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            if let Some(strict) = err.downcast_ref::<StrictFailure>() {
                print!("{}", strict.output);
            }
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

use std::process::ExitCode;

use clap::Parser;
use qwork_cli::{run, Cli};

fn main() -> ExitCode {
    ExitCode::from(run(Cli::parse()))
}

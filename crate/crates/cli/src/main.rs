// SPDX-License-Identifier: Apache-2.0

use std::process::ExitCode;

use camloc_cli::commands::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("camloc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

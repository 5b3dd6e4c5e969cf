use std::process::ExitCode;

use clap::Parser;
use ctspec::cli::{run, Cli};

fn main() -> ExitCode {
    // Usage errors exit with 2 and --help/--version with 0 inside clap.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

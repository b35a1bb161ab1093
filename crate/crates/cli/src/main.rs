use std::process::ExitCode;

use clap::Parser;
use semgrid_cli::{run, Cli, EXIT_NO_DOORS};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => {
            if code == EXIT_NO_DOORS {
                eprintln!("semgrid: no doors found");
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("semgrid: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

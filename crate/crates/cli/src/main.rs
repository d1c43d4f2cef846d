use std::process::exit;

use clap::error::ErrorKind;
use clap::Parser;

use relmmd::app::{init_threads, run, Cli};

fn main() {
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        exit(e.exit_code());
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            exit(0);
        }
        Err(e) => {
            // Clap would exit 2, which this tool reserves for an
            // inconclusive decision; usage problems are status 3.
            eprint!("{e}");
            exit(3);
        }
    };
    match run(&cli) {
        Ok(status) => exit(status),
        Err(e) => {
            eprintln!("error: {e}");
            exit(e.exit_code());
        }
    }
}

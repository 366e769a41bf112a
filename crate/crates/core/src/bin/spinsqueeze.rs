use clap::Parser;
use spinsqueeze::cli::{execute, exit_code, Cli};

fn main() {
    if let Err(e) = execute(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}

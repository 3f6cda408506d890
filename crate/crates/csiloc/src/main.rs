//! Binary entry point; all logic lives in the library's `cli` module.

use clap::Parser;

fn main() {
    let cli = csiloc::cli::Cli::parse();
    if let Err(e) = csiloc::cli::execute(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

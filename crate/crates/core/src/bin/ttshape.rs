use clap::Parser;

use ttshape::cli::{error_json, execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = execute(&cli) {
        eprintln!("{}", error_json(&err));
        std::process::exit(1);
    }
}

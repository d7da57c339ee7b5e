use clap::Parser;
use fpr::cli::Cli;

fn main() {
    if let Err(e) = Cli::parse().run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

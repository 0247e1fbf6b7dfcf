use clap::Parser;
use gravstat_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("gravstat: {e}");
        std::process::exit(e.exit_code());
    }
}

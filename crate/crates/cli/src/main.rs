use clap::Parser;

use wavesyn_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("wavesyn: {e}");
        std::process::exit(e.exit_code());
    }
}

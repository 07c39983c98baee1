use clap::Parser;

use wstate_ecp_cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}

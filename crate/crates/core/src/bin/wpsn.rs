use clap::Parser;
use wpsn::cli::{dispatch, CliCommand};

fn main() {
    if let Some(n) = std::env::var("WPSN_THREADS").ok().and_then(|v| v.parse().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cmd = CliCommand::parse();
    std::process::exit(dispatch(&cmd));
}

use std::process::ExitCode;

use clap::Parser;
use rlimit::cli::{run, Cli};
use rlimit::EXIT_INPUT;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("RLIMIT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}

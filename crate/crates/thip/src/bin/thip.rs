//! Thin launcher for the pipeline subcommands.

use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    ExitCode::from(thip::cli::run(std::env::args()) as u8)
}

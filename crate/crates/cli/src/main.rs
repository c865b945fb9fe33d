use std::process::ExitCode;

use clap::Parser;
use culture_class_cli::{execute, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(files) => {
            log::info!("wrote {} file(s) to the output directory", files.len());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("culture-class {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bangbang", version, about = "Relaxation of periodically kicked two-level systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario described by a TOML configuration file.
    Run {
        config: PathBuf,
        /// Write the table here instead of the configured `output`.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Parse and validate a configuration without running it.
    Check { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, output } => bangbang::run_file(&config, output.as_deref()).map(|p| eprintln!("wrote {}", p.display())),
        Command::Check { config } => bangbang::load(&config).map(|_| ()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! `fraclap`: trees, Haar transforms, energies, verification suites and
//! Green functions from the command line.

mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Command, Flags, Suite};

#[derive(Debug, Parser)]
#[command(name = "fraclap", version, about, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Build the dyadic tree and write tree.json
    Tree(Flags),
    /// Haar-transform a function and write decomposition.csv
    Transform(Flags),
    /// Evaluate an energy and write energy.json
    Energy(Flags),
    /// Run a verification suite and write verify_<suite>.json
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        flags: Flags,
    },
    /// Solve for a Green function and write green.csv, green.json, green_plot.csv
    Green(Flags),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Sub::Tree(f) => (Command::Tree, f),
        Sub::Transform(f) => (Command::Transform, f),
        Sub::Energy(f) => (Command::Energy, f),
        Sub::Verify { suite, flags } => (Command::Verify(suite), flags),
        Sub::Green(f) => (Command::Green, f),
    };
    let result = config::resolve(command, &flags).and_then(|cfg| commands::run(&cfg));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            if matches!(e, error::CliError::Usage(_)) {
                eprintln!("see `fraclap {} --help`", command.name());
            }
            ExitCode::from(code)
        }
    }
}

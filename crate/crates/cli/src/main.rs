use std::process::ExitCode;

use clap::Parser;

use nbs_cli::args::{Cli, Command};
use nbs_cli::commands;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(a) => commands::run(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Randgrid(a) => commands::randgrid(a),
        Command::Genmap(a) => commands::genmap(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nbs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

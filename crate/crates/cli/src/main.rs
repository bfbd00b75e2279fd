use std::io;
use std::process::ExitCode;

use clap::Parser;
use qwalk_cli::args::Cli;
use qwalk_cli::config::{ExperimentConfig, PartialConfig};
use qwalk_cli::run::{run, write_outputs};
use qwalk_cli::CliError;

fn execute(cli: &Cli) -> Result<(), CliError> {
    let flags = cli.command.to_partial();
    let partial = match &cli.command.common().config {
        Some(path) => PartialConfig::load(path)?.overlay(flags),
        None => flags,
    };
    let cfg = ExperimentConfig::resolve(partial)?;
    let outcome = run(&cfg)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let written = write_outputs(&cfg, &outcome, &mut io::stdout().lock())?;
    eprintln!("{}", outcome.summary);
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

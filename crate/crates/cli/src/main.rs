use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use nlbeat_cli::output::{load_config, run_dir, write_files, Provenance};
use nlbeat_cli::{execute, Cli, CliError};

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match (cli.command, &cli.config) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "give either a subcommand or --config, not both".into(),
            ))
        }
        (Some(c), None) => c,
        (None, Some(path)) => load_config(path)?,
        (None, None) => {
            return Err(CliError::Config(
                "no subcommand given; try `nlbeat --help`".into(),
            ))
        }
    };
    let artifacts = execute(&config)?;
    let dir = match cli.output {
        Some(dir) => dir,
        None => run_dir(&cli.out_dir, &Provenance::of(&config)),
    };
    let files: Vec<(String, String)> = artifacts
        .into_iter()
        .map(|a| (a.name, a.contents))
        .collect();
    for path in write_files(&dir, &files, cli.force)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

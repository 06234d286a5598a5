mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

use crate::args::{Cli, Command};
use crate::commands::CliError;

fn run(cli: &Cli) -> Result<Option<String>, CliError> {
    match &cli.command {
        Command::Align(a) => commands::align(a).map(|_| None),
        Command::GenPartial(a) => commands::gen_partial(a).map(|_| None),
        Command::Mix(a) => commands::mix_cmd(a, cli.seed).map(|_| None),
        Command::Score(a) => commands::score(a).map(Some),
        Command::Reseg(a) => commands::reseg(a).map(Some),
        Command::Simulate(a) => commands::simulate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };

    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    eprintln!("retrans: seed={} {:?}", cli.seed, cli.command);

    match run(&cli) {
        Ok(Some(out)) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(CliError::Usage { subcommand, message }) => {
            let mut cmd = Cli::command();
            cmd.build();
            let usage = cmd
                .find_subcommand_mut(subcommand)
                .map(|c| c.render_usage().to_string())
                .unwrap_or_default();
            eprintln!("error: {message}\n\n{usage}\n\nFor more information, try '--help'.");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use clap::Parser;

use expcli::cli::{Cli, Command};
use expcli::commands::{self, CommandError};
use expcli::config::Settings;
use expcli::{exit_code_for, exit_codes};

fn main() {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version are not errors; everything else is a config error.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(exit_codes::OK);
            }
            eprint!("{e}");
            std::process::exit(exit_codes::CONFIG_ERROR);
        }
    };
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    let mut settings = match &cli.config {
        Some(path) => match Settings::from_file(path) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("{e}");
                return exit_codes::CONFIG_ERROR;
            }
        },
        None => Settings::default(),
    };

    let result = match &cli.command {
        Command::Rank(args) => {
            args.apply(&mut settings);
            settings.apply_env();
            commands::rank::run(&settings)
        }
        Command::Dla(args) => {
            args.apply(&mut settings);
            settings.apply_env();
            commands::dla::run(&settings)
        }
        Command::Train(args) => {
            args.apply(&mut settings);
            settings.apply_env();
            commands::train::run(&settings)
        }
        Command::Sweep(args) => {
            args.apply(&mut settings);
            settings.apply_env();
            commands::sweep::run(&settings)
        }
        Command::Bound(args) => {
            args.apply(&mut settings);
            settings.apply_env();
            commands::bound::run(&settings)
        }
    };

    match result {
        Ok(code) => code,
        Err(CommandError::Config(e)) => {
            eprintln!("{e}");
            exit_codes::CONFIG_ERROR
        }
        Err(CommandError::Core(e)) => {
            eprintln!("{e}");
            exit_code_for(&e)
        }
    }
}

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use elkies_cli::{exit, exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(exit::USAGE as u8),
            };
        }
    };
    let result = run(&cli);
    match &result {
        Ok(outcome) => println!("{}", outcome.summary),
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}

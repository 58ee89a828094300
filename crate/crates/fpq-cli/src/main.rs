use std::process::ExitCode;

use clap::Parser;
use fpq_cli::opts::{Cli, Command};
use fpq_cli::{commands, CmdError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::SamplePath(args) => commands::sample_path(args),
        Command::BusyPeriodMc(args) => commands::busy_period_mc(args).map(|_| ()),
        Command::Airy(args) => commands::airy_cmd(args),
        Command::Figure2(args) => commands::figure2(args),
        Command::DiffusionMc(args) => commands::diffusion_mc(args).map(|_| ()),
        Command::Check(args) => commands::check(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fpq: {e}");
            match e {
                CmdError::Usage(_) => ExitCode::from(2),
                CmdError::Numeric(_) => ExitCode::from(3),
                CmdError::Io(_) => ExitCode::FAILURE,
            }
        }
    }
}

mod args;
mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::Parser;
use divlab::LabError;

use args::Cli;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lab(LabError),
    Io(std::io::Error),
    /// Acceptance criteria that did not pass.
    Failed(Vec<u8>),
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        CliError::Lab(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Lab(LabError::Argument(_)) => 2,
            CliError::Lab(LabError::Budget { .. }) => 3,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Lab(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Failed(ids) => write!(f, "criteria {ids:?} failed"),
        }
    }
}

fn parse(argv: Vec<OsString>) -> Result<Cli, ExitCode> {
    let argv = match config::config_path(&argv) {
        Some(path) => match config::subcommand_index(&argv) {
            Some(at) => {
                let name = argv[at].to_string_lossy().into_owned();
                config::merge(&argv, &name, &path).map_err(|e| {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                })?
            }
            None => argv,
        },
        None => argv,
    };
    Cli::try_parse_from(argv).map_err(|e| {
        let _ = e.print();
        ExitCode::from(e.exit_code() as u8)
    })
}

fn main() -> ExitCode {
    let cli = match parse(std::env::args_os().collect()) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Some(n) = cli.threads {
        if n == 0 || rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            eprintln!("error: cannot use {n} threads");
            return ExitCode::from(2);
        }
    }
    match commands::execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! `weakcover` command-line front end.
//!
//! Exit codes: 0 success, 2 invalid arguments, 3 numeric failure or
//! infeasible request, 1 I/O failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod config;
mod output;

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use weakcover::SeededStream;

use args::Cli;
use commands::Output;
use output::Meta;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(weakcover::Error),
    Io(io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use weakcover::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(E::Domain(_) | E::DimensionMismatch { .. } | E::UnsupportedDimension { .. }) => 2,
            CliError::Lib(E::Infeasible(_) | E::Numeric(_)) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl From<weakcover::Error> for CliError {
    fn from(e: weakcover::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let common = cli.command.common();
    if let Some(t) = common.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let name = cli.command.name();
    let stream = SeededStream::new(common.seed, 0).child(name);
    let output = commands::execute(&cli.command, stream)?;
    let meta = Meta { experiment: common.experiment.as_deref().unwrap_or(name), command: name, seed: common.seed, timing: common.timing };
    let mut buf = Vec::new();
    match &output {
        Output::Rows(rows) => output::write_rows(&mut buf, rows, &meta, common.format)?,
        Output::Design(d) => output::write_design(&mut buf, d, &meta, common.format)?,
    }
    match &common.out {
        Some(path) => fs::write(path, &buf)?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let argv = match config::expand_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

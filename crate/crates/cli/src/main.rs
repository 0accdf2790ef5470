mod commands;
mod config;
mod error;
mod output;
mod svg;
mod sweep;

use std::process::ExitCode;

use clap::Parser;

use crate::config::{Cli, RunConfig};
use crate::error::{CliError, Result};

fn threads() -> Result<Option<usize>> {
    match std::env::var("CWLAB_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Param(format!("CWLAB_THREADS must be a positive integer, got `{s}`"))),
        },
    }
}

fn run(cli: Cli) -> Result<()> {
    let (command, flags) = cli.command.split();
    let cfg = RunConfig::resolve(command, flags)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Param(format!("thread pool: {e}")))?;
    let files = pool.install(|| commands::run(&cfg))?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cwlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

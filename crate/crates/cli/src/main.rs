//! `shatterlab` command-line front end.
//!
//! Exit status: 0 on success, 1 on a parse, domain or validation error,
//! 2 when a capacity cap is hit, 3 when a `verify` run reports violations.

mod args;
mod commands;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use shatterlab::Error;

use args::Cli;

const EXIT_ERROR: u8 = 1;
const EXIT_CAPACITY: u8 = 2;
const EXIT_VIOLATIONS: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Capacity { .. } => EXIT_CAPACITY,
        _ => EXIT_ERROR,
    }
}

fn run(cli: &Cli) -> Result<u8, (u8, String)> {
    let g = &cli.global;
    if let Some(t) = g.threads {
        if t == 0 {
            return Err((EXIT_ERROR, "--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| (EXIT_ERROR, format!("thread pool: {e}")))?;
    }
    if !(g.tolerance >= 0.0 && g.tolerance.is_finite()) {
        return Err((EXIT_ERROR, format!("--tolerance = {} must be finite and >= 0", g.tolerance)));
    }
    let report = commands::dispatch(&cli.command, g).map_err(|e| (exit_code(&e), e.to_string()))?;
    let io_err = |e: io::Error| (EXIT_ERROR, format!("writing report: {e}"));
    match &g.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| (EXIT_ERROR, format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            report.render(g.format, &mut w).map_err(io_err)?;
            w.flush().map_err(io_err)?;
        }
        None => {
            let mut w = io::stdout().lock();
            report.render(g.format, &mut w).map_err(io_err)?;
            w.flush().map_err(io_err)?;
        }
    }
    match report.violation_count() {
        Some(v) if v > 0 => Ok(EXIT_VIOLATIONS),
        _ => Ok(0),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // usage errors are validation errors; clap's own status 2 would read as a capacity failure
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use siegel_core::numerics::{set_working_precision, DEFAULT_PRECISION};
use siegel_core::Error;

mod commands;
mod config;
mod report;

use config::{Command, Format, RunConfig, PRECISION_ENV};

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_ASSERT: u8 = 4;

/// Numerical experiments on cubic polynomials with a Siegel disk and their
/// parabolic approximants.
///
/// Exit status: 0 success, 2 invalid input, 3 numeric-domain failure or
/// refusal, 4 failed `--assert`.
#[derive(Parser, Debug)]
#[command(name = "siegel", version)]
struct Cli {
    /// Run configuration: a JSON file, or any output of an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Mantissa bits for extended precision (default from SIEGEL_PRECISION, else 192).
    #[arg(long, global = true)]
    precision: Option<u32>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write the class map of raster commands to this PGM file.
    #[arg(long, global = true)]
    pgm: Option<PathBuf>,
    /// Exit with status 4 when any invariant check fails.
    #[arg(long, global = true)]
    assert: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("siegel: {msg}");
            ExitCode::from(code)
        }
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, Error> {
    let config = match (&cli.config, &cli.command) {
        (Some(path), None) => {
            if cli.precision.is_some() || cli.format.is_some() {
                return Err(Error::Precondition("--precision and --format come from --config; drop them".into()));
            }
            RunConfig::load(path)?
        }
        (Some(_), Some(_)) => return Err(Error::Precondition("give either --config or a subcommand, not both".into())),
        (None, None) => return Err(Error::Precondition("no subcommand given (see --help)".into())),
        (None, Some(command)) => RunConfig {
            precision: match cli.precision {
                Some(p) => p,
                None => default_precision()?,
            },
            format: cli.format.unwrap_or(Format::Csv),
            command: command.clone(),
        },
    };
    config.validate()?;
    Ok(config)
}

fn default_precision() -> Result<u32, Error> {
    match std::env::var(PRECISION_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::Parse(format!("{PRECISION_ENV}={v:?} is not an integer"))),
        Err(_) => Ok(DEFAULT_PRECISION),
    }
}

fn exit_class(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Precondition(_) | Error::Io(_) => EXIT_VALIDATION,
        _ => EXIT_NUMERIC,
    }
}

fn execute(cli: Cli) -> Result<u8, (u8, String)> {
    let config = resolve(&cli).map_err(|e| (exit_class(&e), e.to_string()))?;
    set_working_precision(config.precision);
    let command = &config.command;
    let report = commands::run(&config)
        .map_err(|e| (exit_class(&e), format!("{} ({}): {e}", command.name(), command.module())))?;
    let io = |e: std::io::Error| (EXIT_VALIDATION, format!("writing output: {e}"));
    let payload = report.render(&config);
    match &cli.out {
        Some(path) => std::fs::write(path, &payload).map_err(io)?,
        None => std::io::stdout().write_all(&payload).map_err(io)?,
    }
    if let Some(path) = &cli.pgm {
        match &report.pgm {
            Some(bytes) => std::fs::write(path, bytes).map_err(io)?,
            None => eprintln!("siegel: {} writes no class map; --pgm ignored", command.name()),
        }
    }
    if let Some(reason) = &report.refusal {
        eprintln!("siegel: {} ({}) refused: {reason}", command.name(), command.module());
        return Ok(EXIT_NUMERIC);
    }
    if cli.assert && !report.all_passed() {
        for c in report.checks.iter().filter(|c| !c.passed) {
            eprintln!("siegel: {} ({}): check {} failed: {}", command.name(), command.module(), c.name, c.detail);
        }
        return Ok(EXIT_ASSERT);
    }
    Ok(0)
}

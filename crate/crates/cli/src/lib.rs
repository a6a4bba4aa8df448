//! Experiment runner behind the `fpp` binary. Every subcommand turns a
//! configuration into a [`Document`]; identical configurations produce
//! identical documents.

pub mod args;
pub mod commands;
pub mod document;
pub mod revalidate;

use std::ffi::OsString;
use std::fmt;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{CommandFactory, Parser};

pub use args::{parse_alpha, Cli, Command, Format};
pub use document::{parse_report, Document, ParsedReport};

pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn usage(e: impl fmt::Display) -> Self {
        CliError::Usage(e.to_string())
    }

    pub fn io(e: impl fmt::Display) -> Self {
        CliError::Io(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Runs one subcommand without writing anything.
pub fn execute(cmd: &Command) -> Result<Document, CliError> {
    match cmd {
        Command::Revalidate(a) => revalidate::revalidate(cmd, a),
        _ => commands::execute(cmd),
    }
}

/// Parses arguments, runs, writes the report and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run_command(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("fpp: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("{}", Cli::command().render_usage());
            }
            EXIT_USAGE
        }
    }
}

fn run_command(cmd: &Command) -> Result<i32, CliError> {
    let common = cmd.common();
    let mut doc = execute(cmd)?;
    if !common.no_timestamp {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        doc.timestamp = Some(secs);
    }
    let text = doc.render(common.format)?;
    match &common.out {
        Some(path) => {
            std::fs::write(path, &text)
                .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            println!(
                "{}: {} -> {}",
                doc.command,
                doc.verdict.as_str(),
                path.display()
            );
        }
        None => print!("{text}"),
    }
    Ok(doc.exit_code())
}

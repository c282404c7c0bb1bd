//! Batch harness around `peel-core`: argument and config-file resolution,
//! corpus pairing, and the `attack`, `certify`, `probe` and `inpaint-eval`
//! subcommands.
//!
//! Exit codes: 0 on success, 1 when some items failed (or a fatal runtime
//! error occurred), 2 on configuration errors.

pub mod commands;
pub mod config;
pub mod corpus;

use std::fmt;

pub use config::{Cli, Command, RunArgs, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Fatal(anyhow::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Fatal(e) => write!(f, "{e:#}"),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Fatal(e.into())
    }
}

fn dispatch(command: &Command) -> Result<usize, CliError> {
    type Body = fn(&RunConfig) -> Result<usize, CliError>;
    let (args, uses_attacks, body): (&RunArgs, bool, Body) = match command {
        Command::Attack(a) => (a, true, commands::cmd_attack),
        Command::Certify(a) => (a, true, commands::cmd_certify),
        Command::Probe(a) => (a, false, commands::cmd_probe),
        Command::InpaintEval(a) => (a, false, commands::cmd_inpaint_eval),
    };
    let cfg = RunConfig::resolve_for(args, uses_attacks)?;
    match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(|| body(&cfg)),
        None => body(&cfg),
    }
}

/// Runs one parsed invocation and returns its exit code.
pub fn run(cli: &Cli) -> i32 {
    match dispatch(&cli.command) {
        Ok(0) => EXIT_OK,
        Ok(n) => {
            eprintln!("{n} item(s) failed");
            EXIT_PARTIAL
        }
        Err(e) => {
            eprintln!("peel: {e}");
            match e {
                CliError::Config(_) => EXIT_CONFIG,
                CliError::Fatal(_) => EXIT_PARTIAL,
            }
        }
    }
}

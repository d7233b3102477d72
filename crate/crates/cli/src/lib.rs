//! Command-line front end for the photonic PUF simulator: dataset
//! generation, PUF metrics, response analyses and attack sweeps.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 for
//! data errors (unreadable, malformed, inconsistent or degenerate input).

pub mod commands;
pub mod error;
pub mod format;
pub mod manifest;
pub mod report;

use clap::{Parser, Subcommand};

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "ppuf", version, about = "Photonic PUF simulation and analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build seeded PUFs and write one CRP dataset file per PUF.
    Generate(commands::generate::GenerateArgs),
    /// Uniqueness, uniformity, bit aliasing or reliability over datasets.
    Metrics(commands::metrics::MetricsArgs),
    /// CRP scatter or response autocorrelation export for one dataset.
    Analyze(commands::analyze::AnalyzeArgs),
    /// Training-set-size sweep of a response predictor.
    Attack(commands::attack::AttackArgs),
}

/// Run a parsed command, writing its report to the requested destination.
pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Generate(a) => commands::generate::run(a)?.emit(None),
        Command::Metrics(a) => commands::metrics::run(a)?.emit(a.output.as_deref()),
        Command::Analyze(a) => commands::analyze::run(a)?.emit(a.output.as_deref()),
        Command::Attack(a) => commands::attack::run(a)?.emit(a.output.as_deref()),
    }
}

/// Parse `args` (program name first) and run, returning the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ppuf: {e}");
            e.exit_code()
        }
    }
}

//! Batch front end for `clusterx`: reads a JSON run configuration, dispatches
//! to a subcommand, and renders JSON or CSV.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub mod commands;
pub mod config;
pub mod output;

pub use config::RunConfig;

/// Environment variable overriding the dense-dimension cap of the oracle.
pub const CAP_ENV: &str = "CLUSTERX_CAP";

#[derive(Debug, Clone, Parser)]
#[command(name = "clusterx", version, about = "Truncated cluster expansions for log Tr[exp(-beta H) rho]")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads; 0 uses all available cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Output path; overrides the config and defaults to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Report `wall_time_s` as null so outputs are byte-reproducible.
    #[arg(long, global = true)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Truncated expansion with its error certificate.
    Estimate,
    /// Exact diagonalization reference.
    Exact,
    /// Expansion and exact value side by side.
    Compare,
    /// Clusters as JSON lines.
    Enumerate,
    /// Density of states from the time trace.
    Dos,
    /// Concentration, MGF, Berry-Esseen and Loschmidt checks.
    Stats,
    /// Wall time against order and size.
    Bench,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed or inconsistent input; exit code 2.
    Config(String),
    /// The computation refused the input; exit code 3.
    Compute(clusterx::Error),
    /// Output could not be written; exit code 1.
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::Compute(e) => write!(f, "{e}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<clusterx::Error> for CliError {
    fn from(e: clusterx::Error) -> Self {
        use clusterx::Error as E;
        match e {
            E::InvalidLattice(_) | E::InvalidTerm { .. } | E::InvalidHamiltonian(_) | E::InvalidState(_) => Self::Config(e.to_string()),
            other => Self::Compute(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Compute(_) => 3,
            Self::Io(_) => 1,
        }
    }

    /// JSON body printed on stdout for computation errors.
    pub fn body(&self) -> Vec<u8> {
        #[derive(Serialize)]
        struct Body<'a> {
            error: &'a str,
            message: String,
        }
        let kind = match self {
            Self::Config(_) => "config",
            Self::Io(_) => "io",
            Self::Compute(e) => error_kind(e),
        };
        output::json_line(&Body { error: kind, message: self.to_string() })
    }
}

fn error_kind(e: &clusterx::Error) -> &'static str {
    use clusterx::Error as E;
    match e {
        E::CapExceeded { .. } => "cap_exceeded",
        E::UrsellCap { .. } => "ursell_cap",
        E::Domain(_) => "domain",
        E::Branch { .. } => "branch",
        E::Nyquist { .. } => "nyquist",
        E::ZeroVariance => "zero_variance",
        E::DegenerateSamples(_) => "degenerate_samples",
        E::DisconnectedGraph => "disconnected_graph",
        _ => "invalid_input",
    }
}

/// Rendered result: the main document and, for CSV tables, a JSON summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub body: Vec<u8>,
    pub summary: Option<Vec<u8>>,
}

/// Dense cap from `CLUSTERX_CAP`, or the library default.
pub fn dense_cap() -> Result<usize, CliError> {
    match std::env::var(CAP_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Config(format!("{CAP_ENV}={v} is not a positive integer"))),
        Err(_) => Ok(clusterx::oracle::DEFAULT_DENSE_CAP),
    }
}

/// Loads the configuration named by `cli` and runs the subcommand.
pub fn execute(cli: &Cli) -> Result<Rendered, CliError> {
    execute_with(cli, &load(cli)?)
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    RunConfig::load(path)
}

pub fn execute_with(cli: &Cli, cfg: &RunConfig) -> Result<Rendered, CliError> {
    let ctx = commands::Context::new(cli, cfg)?;
    match cli.command {
        Command::Estimate => commands::estimate(&ctx),
        Command::Exact => commands::exact(&ctx),
        Command::Compare => commands::compare(&ctx),
        Command::Enumerate => commands::enumerate(&ctx),
        Command::Dos => commands::dos(&ctx),
        Command::Stats => commands::stats(&ctx),
        Command::Bench => commands::bench(&ctx),
    }
}

/// Parses arguments, runs, writes output, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = load(&cli).and_then(|cfg| {
        let rendered = execute_with(&cli, &cfg)?;
        write_rendered(&rendered, cli.out.as_ref().or(cfg.output.as_ref()))
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("clusterx: {e}");
            if let CliError::Compute(_) = e {
                use std::io::Write;
                let _ = std::io::stdout().write_all(&e.body());
            }
            e.exit_code()
        }
    }
}

fn write_rendered(rendered: &Rendered, out: Option<&PathBuf>) -> Result<(), CliError> {
    use std::io::Write;
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match out {
        Some(path) => {
            std::fs::write(path, &rendered.body).map_err(io)?;
            if let Some(summary) = &rendered.summary {
                std::fs::write(path.with_extension("summary.json"), summary).map_err(io)?;
            }
        }
        None => {
            std::io::stdout().write_all(&rendered.body).map_err(io)?;
            if let Some(summary) = &rendered.summary {
                std::io::stderr().write_all(summary).map_err(io)?;
            }
        }
    }
    Ok(())
}

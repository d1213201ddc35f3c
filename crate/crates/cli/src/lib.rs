//! `zentropy`: config-driven experiments over entropic potentials, with
//! byte-stable CSV/JSON outputs and per-event attribution reports.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration or input error.

pub mod attribution;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use crate::commands::{Input, RunSummary};
pub use crate::config::{LoadedConfig, RunConfig};
pub use crate::error::{CliError, Result};

/// Environment variable that overrides `--out`.
pub const OUT_ENV: &str = "ZENTROPY_OUT";
pub const DEFAULT_OUT: &str = "zentropy-out";

#[derive(Debug, Parser)]
#[command(
    name = "zentropy",
    version,
    about = "Entropic-potential experiments and attribution reports"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score grid-world actions by their entropic potential.
    Gridworld(RunArgs),
    /// Q-learning with optional entropic reward shaping.
    Train(RunArgs),
    /// Rank Bayesian queries and attribute observed data.
    Bayes(RunArgs),
    /// Score a numeric stream for entropy spikes.
    Anomaly {
        #[command(flatten)]
        run: RunArgs,
        /// Newline-delimited values; standard input when absent or `-`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Print the attribution table of a finished run.
    Report {
        /// Run directory; defaults to the output directory.
        dir: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// What a successful invocation has to show for itself.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Wrote(RunSummary),
    Report(String),
}

/// Output directory: the environment variable, then the flag, then the
/// config's `out`, then [`DEFAULT_OUT`].
pub fn resolve_out(env: Option<&OsString>, flag: Option<&Path>, config: Option<&Path>) -> PathBuf {
    env.filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .or_else(|| flag.map(Path::to_path_buf))
        .or_else(|| config.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn prepare(run: &RunArgs, env_out: Option<&OsString>) -> Result<(LoadedConfig, PathBuf)> {
    let loaded = LoadedConfig::load(&run.config, run.seed)?;
    let out = resolve_out(env_out, run.out.as_deref(), loaded.config.out.as_deref());
    Ok((loaded, out))
}

/// Executes one command. `env_out` is the value of [`OUT_ENV`], passed in so
/// callers control the environment.
pub fn run(cli: &Cli, env_out: Option<&OsString>) -> Result<Outcome> {
    match &cli.command {
        Command::Gridworld(args) => {
            let (loaded, out) = prepare(args, env_out)?;
            commands::gridworld(&loaded, &out).map(Outcome::Wrote)
        }
        Command::Train(args) => {
            let (loaded, out) = prepare(args, env_out)?;
            commands::train(&loaded, &out).map(Outcome::Wrote)
        }
        Command::Bayes(args) => {
            let (loaded, out) = prepare(args, env_out)?;
            commands::bayes(&loaded, &out).map(Outcome::Wrote)
        }
        Command::Anomaly { run, input } => {
            let (loaded, out) = prepare(run, env_out)?;
            if loaded.config.anomaly.is_none() {
                return Err(CliError::MissingBlock("anomaly"));
            }
            let input = match input {
                Some(p) if p.as_os_str() != "-" => Input::File(p.clone()),
                _ => Input::Stdin,
            };
            let values = commands::read_values(&input)?;
            commands::anomaly(&loaded, &values, &out).map(Outcome::Wrote)
        }
        Command::Report { dir, out } => {
            let dir = dir
                .clone()
                .unwrap_or_else(|| resolve_out(env_out, out.as_deref(), None));
            report::report(&dir).map(Outcome::Report)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_overrides_flag() {
        let env = OsString::from("from-env");
        let flag = Path::new("from-flag");
        assert_eq!(
            resolve_out(Some(&env), Some(flag), None),
            PathBuf::from("from-env")
        );
        assert_eq!(
            resolve_out(Some(&OsString::new()), Some(flag), None),
            PathBuf::from("from-flag")
        );
        assert_eq!(
            resolve_out(None, None, Some(Path::new("cfg"))),
            PathBuf::from("cfg")
        );
        assert_eq!(resolve_out(None, None, None), PathBuf::from(DEFAULT_OUT));
    }

    #[test]
    fn parses_command_lines() {
        let cli = Cli::try_parse_from([
            "zentropy", "anomaly", "--config", "c.json", "--input", "-", "--seed", "3",
        ])
        .unwrap();
        assert!(matches!(cli.command, Command::Anomaly { .. }));
        assert!(Cli::try_parse_from(["zentropy", "gridworld"]).is_err());
        assert!(Cli::try_parse_from(["zentropy", "report", "runs/a"]).is_ok());
    }
}

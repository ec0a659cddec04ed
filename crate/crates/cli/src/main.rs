//! `hyperequil`: solve Cook's membrane, equilibrate the stresses, verify the
//! patch operators and write the report tables.
//!
//! Exit codes: 0 success, 1 solver or I/O failure, 2 usage error, 3 audit
//! failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] hyperequil::Error),
    #[error("missing artifact {0}; run `hyperequil solve` with the same configuration first")]
    Missing(String),
    #[error("{0}")]
    Io(String),
    #[error("audit failed:\n  {}", .0.join("\n  "))]
    Audit(Vec<String>),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Audit(_) => 3,
            CliError::Solver(hyperequil::Error::IncompatibleRhs { .. } | hyperequil::Error::NullSpaceMismatch { .. }) => 3,
            CliError::Solver(_) | CliError::Missing(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "hyperequil", version, about = "Equilibrated stresses for Neo-Hookean Cook's membrane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Newton solve per level and load; writes checkpoints, Newton logs and meshes.
    Solve(Common),
    /// Equilibrate checkpoints; writes stress coefficients and audit CSVs.
    Equilibrate {
        #[command(flatten)]
        common: Common,
        /// Checkpoint files to equilibrate instead of those named by the configuration.
        #[arg(long = "checkpoint")]
        checkpoints: Vec<PathBuf>,
    },
    /// Adjoint null-space and compatibility scans; writes verify CSVs.
    Verify(Common),
    /// Tables of resultants and convergence rates plus the Γ_D traction profile.
    Report(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat `key = value` configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated load magnitudes.
    #[arg(long)]
    gamma: Option<String>,
    /// Comma-separated ascending refinement levels.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    /// Lamé parameter, or `inf` for the incompressible limit.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    load_steps: Option<String>,
    /// Projection mode: `naive` or `compatible`.
    #[arg(long)]
    mode: Option<String>,
    /// Test spaces: `deformed` or `reference`.
    #[arg(long)]
    variant: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Treat incompatible data and audit violations as failures (exit code 3).
    #[arg(long)]
    strict: bool,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            cfg.apply_file(&text)?;
        }
        let flags = [
            ("gamma", &self.gamma),
            ("levels", &self.levels),
            ("mu", &self.mu),
            ("lambda", &self.lambda),
            ("load_steps", &self.load_steps),
            ("mode", &self.mode),
            ("variant", &self.variant),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        cfg.strict |= self.strict;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(c) => commands::solve(&c.resolve()?),
        Command::Equilibrate { common, checkpoints } => commands::equilibrate_cmd(&common.resolve()?, &checkpoints),
        Command::Verify(c) => commands::verify_cmd(&c.resolve()?),
        Command::Report(c) => commands::report(&c.resolve()?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hyperequil: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! Argument parsing and dispatch.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{self, GridSpec, SweepParam};
use crate::config::ConfigFile;
use crate::error::{CliError, Result};
use crate::output::Document;

#[derive(Debug, Parser)]
#[command(name = "trilayer", version, about = "Three-layer tumor free-boundary solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical radii at the configured supply and the critical supply values.
    Critical {
        #[command(flatten)]
        common: Common,
    },
    /// The dormant tumor at the configured supply.
    Stationary {
        #[command(flatten)]
        common: Common,
    },
    /// Nutrient profile of a tumor of radius R.
    Profile {
        #[command(flatten)]
        common: Common,
        /// Tumor radius; defaults to the configured R0.
        #[arg(long = "R", allow_negative_numbers = true)]
        radius: Option<f64>,
    },
    /// Radius trajectory and structural transitions.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Initial radius; defaults to the configured R0.
        #[arg(long = "R0", allow_negative_numbers = true)]
        r0: Option<f64>,
        #[arg(long = "t-end", default_value_t = 100.0, allow_negative_numbers = true)]
        t_end: f64,
        #[arg(long = "sample-dt", default_value_t = 1.0, allow_negative_numbers = true)]
        sample_dt: f64,
        /// Events CSV path. Defaults to the output path with an `.events.csv`
        /// suffix; not written in CSV mode without either.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Critical values and dormant states over a parameter grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        param: SweepParam,
        /// `start:stop:count`, at least two strictly increasing points.
        #[arg(long, allow_hyphen_values = true)]
        grid: GridSpec,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Critical { common }
            | Command::Stationary { common }
            | Command::Profile { common, .. }
            | Command::Evolve { common, .. }
            | Command::Sweep { common, .. } => common,
        }
    }
}

/// Runs the command and returns its result document.
pub fn execute(cmd: &Command) -> Result<Document> {
    let cfg = ConfigFile::load(&cmd.common().config)?.to_model();
    match cmd {
        Command::Critical { .. } => commands::run_critical(&cfg),
        Command::Stationary { .. } => commands::run_stationary(&cfg),
        Command::Profile { radius, .. } => commands::run_profile(&cfg, radius.unwrap_or(cfg.r0)),
        Command::Evolve { r0, t_end, sample_dt, .. } => {
            commands::run_evolve(&cfg, r0.unwrap_or(cfg.r0), *t_end, *sample_dt)
        }
        Command::Sweep { param, grid, .. } => commands::run_sweep(&cfg, *param, *grid),
    }
}

fn write_bytes(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)
            .map_err(|source| CliError::Write { path: p.display().to_string(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Write { path: "<stdout>".into(), source })
        }
    }
}

/// `traj.csv` becomes `traj.events.csv`.
pub fn side_path(out: &Path, name: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{name}.csv"))
}

/// Writes `doc` as the command's output files.
pub fn emit(cmd: &Command, doc: &Document) -> Result<()> {
    let common = cmd.common();
    match common.format {
        Format::Json => write_bytes(common.out.as_deref(), &doc.to_json()),
        Format::Csv => {
            write_bytes(common.out.as_deref(), &doc.primary_table().to_csv()?)?;
            let explicit = match cmd {
                Command::Evolve { events, .. } => events.clone(),
                _ => None,
            };
            for (name, table) in doc.secondary_tables() {
                let path =
                    explicit.clone().or_else(|| common.out.as_deref().map(|o| side_path(o, name)));
                if let Some(p) = path {
                    write_bytes(Some(&p), &table.to_csv()?)?;
                }
            }
            Ok(())
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let doc = execute(&cli.command)?;
    emit(&cli.command, &doc)
}

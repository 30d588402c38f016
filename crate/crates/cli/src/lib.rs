//! Command-line front end for `spincluster`.
//!
//! Exit codes: 0 on success, 2 for usage, config and validation errors,
//! 3 when an asserted numerical check fails.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spincluster::CoefficientMode;

pub mod commands;
pub mod config;

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] spincluster::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "spincluster", version, about = "Exact numerics for small spin-1/2 clusters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues of Q and the joint (S, m, Q) eigenbasis, as JSON.
    QSpectrum(Common),
    /// Level-zero and Serre checks of the Yangian generators, as JSON.
    CheckYangian(Common),
    /// Heisenberg couplings commuting with Q, as JSON.
    Commutant(Common),
    /// Closed-form triangle or parallelogram levels, as JSON.
    Spectrum(Common),
    /// Ground-state classification over a coupling grid, as CSV.
    PhaseMap(Common),
    /// Local moments of a named cluster state, as JSON.
    Moments(Common),
    /// Printed 9x9 levels against exact diagonalization, as CSV.
    LevelsReport(Common),
    /// Magnetization under a swept field, as CSV.
    Simulate(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON config file.
    #[arg(value_name = "CONFIG", conflicts_with = "config")]
    config_pos: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Named scenario applied before the config file.
    #[arg(long, value_parser = config::PRESETS)]
    preset: Option<String>,
    /// Rate-coefficient convention for `simulate`.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Integration steps for `simulate`.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    sites: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Derived,
    #[value(name = "paper_verbatim")]
    PaperVerbatim,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.preset {
            Some(name) => config::preset(name)?,
            None => RunConfig::default(),
        };
        if let Some(path) = self.config_pos.as_ref().or(self.config.as_ref()) {
            cfg = cfg.overlay(RunConfig::from_path(path)?);
        }
        let flags = RunConfig {
            sites: self.sites,
            steps: self.steps,
            out: self.out.clone(),
            coefficient_mode: self.mode.map(|m| match m {
                ModeArg::Derived => CoefficientMode::Derived,
                ModeArg::PaperVerbatim => CoefficientMode::PaperVerbatim,
            }),
            ..Default::default()
        };
        Ok(cfg.overlay(flags))
    }
}

type Render = fn(&RunConfig) -> Result<String, CliError>;

fn execute(command: &Command) -> Result<(String, Option<PathBuf>), CliError> {
    use commands::*;
    let (common, f): (&Common, Render) = match command {
        Command::QSpectrum(c) => (c, |cfg| to_json(&q_spectrum(cfg)?)),
        Command::CheckYangian(c) => (c, |cfg| to_json(&check_yangian(cfg)?)),
        Command::Commutant(c) => (c, |cfg| to_json(&commutant(cfg)?)),
        Command::Spectrum(c) => (c, |cfg| to_json(&spectrum(cfg)?)),
        Command::PhaseMap(c) => (c, phase_map_table),
        Command::Moments(c) => (c, |cfg| to_json(&moments(cfg)?)),
        Command::LevelsReport(c) => (c, levels_report),
        Command::Simulate(c) => (c, simulate),
    };
    let cfg = common.resolve()?;
    Ok((f(&cfg)?, cfg.out))
}

fn emit(text: &str, out: Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(&path, text).map_err(|source| CliError::Output { path, source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Output { path: "<stdout>".into(), source })
        }
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command).and_then(|(text, out)| emit(&text, out)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("spincluster: {e}");
            e.exit_code()
        }
    }
}

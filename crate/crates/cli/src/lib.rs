//! Batch front end: configuration in, deterministic CSV/JSON reports out.

pub mod commands;
pub mod config;
pub mod report;
pub mod suites;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::Settings;
use crate::report::Report;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Io(String),
    Verification { failed: usize },
    NoConvergence(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Io(_) => 3,
            Self::Verification { .. } => 4,
            Self::NoConvergence(_) => 5,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Io(_) => "io",
            Self::Verification { .. } => "verification",
            Self::NoConvergence(_) => "no-convergence",
        }
    }

    /// Single line: `error kind=<kind> code=<n> message=<text>`.
    pub fn line(&self) -> String {
        let msg = match self {
            Self::Config(m) | Self::Io(m) | Self::NoConvergence(m) => m.clone(),
            Self::Verification { failed } => format!("{failed} checks failed"),
        };
        format!("error kind={} code={} message={}", self.kind(), self.code(), msg.replace(['\n', '\r'], " "))
    }
}

impl From<wgauss::Error> for CliError {
    fn from(e: wgauss::Error) -> Self {
        match e {
            wgauss::Error::NoConvergence(m) => Self::NoConvergence(m),
            other => Self::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "wgauss", version, about = "Gaussian measures on Wasserstein space: simulation, bounds and checks")]
pub struct Cli {
    /// Configuration file of `key = value` lines; must set `mc.seed`.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set basis.M=16`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory (overrides `out.dir`).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Simulate OU paths; writes path.csv, snapshot.csv, summary.csv, report.csv.
    Simulate,
    /// Per-mode heat-kernel trace and its bound; writes heat_bound.csv.
    HeatBound,
    /// W_p between two measure CSV files; writes wasserstein.csv.
    Wasserstein { mu: PathBuf, nu: PathBuf },
    /// Run a verification suite; writes verify_<suite>.csv and summary.json.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    ChainRule,
    Lipschitz,
    Ibp,
    Semigroup,
    Orthonormality,
    C1,
    Galerkin,
    Invariance,
    All,
}

impl Suite {
    pub const EACH: [Suite; 8] = [
        Suite::ChainRule,
        Suite::Lipschitz,
        Suite::Ibp,
        Suite::Semigroup,
        Suite::Orthonormality,
        Suite::C1,
        Suite::Galerkin,
        Suite::Invariance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ChainRule => "chain-rule",
            Suite::Lipschitz => "lipschitz",
            Suite::Ibp => "ibp",
            Suite::Semigroup => "semigroup",
            Suite::Orthonormality => "orthonormality",
            Suite::C1 => "c1",
            Suite::Galerkin => "galerkin",
            Suite::Invariance => "invariance",
            Suite::All => "all",
        }
    }
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

/// Runs one invocation. Returns the line to print on success.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let file = cli.config.as_deref().map(read_file).transpose()?;
    let settings = Settings::load(file.as_deref(), &cli.overrides)?;
    settings.validate()?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(settings.str("out.dir")));
    write_file(&out, "config.txt", &settings.render())?;
    let seed = settings.seed()?;
    let (name, report) = match &cli.command {
        Command::Simulate => ("simulate", commands::simulate(&settings, &out)?),
        Command::HeatBound => ("heat-bound", commands::heat_bound(&settings, &out)?),
        Command::Wasserstein { mu, nu } => return commands::wasserstein(&settings, &out, mu, nu),
        Command::Verify { suite } => {
            let report = suites::run_suite(&settings, *suite)?;
            write_file(&out, &format!("verify_{}.csv", suite.name()), &report.to_csv())?;
            write_file(&out, "summary.json", &report.summary_json(suite.name(), seed))?;
            (suite.name(), report)
        }
    };
    finish(name, &report, seed)
}

fn finish(name: &str, report: &Report, seed: u64) -> Result<String, CliError> {
    if report.failed() > 0 {
        return Err(CliError::Verification { failed: report.failed() });
    }
    Ok(format!("{name}: {} passed, 0 failed (seed {seed})", report.passed()))
}

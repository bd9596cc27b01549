//! Command-line front end. Every subcommand parses one or two market spec
//! files, calls into `isomarket-core` and writes `report.csv` plus any
//! `series_*.csv` / `invariant.csv` tables into the output directory.

pub mod commands;
pub mod report;
pub mod spec;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde_json::json;

use commands::{run_command, Settings};
use report::{config_hash, RunReport};
use spec::{load_spec, LoadedSpec};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_PATHS: usize = 1000;
pub const DEFAULT_STEPS: usize = 1000;
pub const DEFAULT_CASINO_GRID: usize = 256;
/// Rebalancing every step reproduces the simulated target exactly, so the
/// finest useful stride is a few steps.
pub const DEFAULT_HEDGE_STRIDES: [usize; 2] = [10, 100];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            CliError::Invalid(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<isomarket_core::Error> for CliError {
    fn from(e: isomarket_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Invalid(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Classification invariant; with two specs, joint and casino isomorphism.
    Classify,
    /// Gaussian normal form `(α, β, γ)` and canonicalizing matrix.
    CanonGauss,
    /// Minimum-variance portfolio at the spec's targets, with the two funds.
    SolveTwoFund,
    /// Composite rearrangement of each payoff over the casino grid.
    Rearrange,
    /// Conditional expectation of each payoff given the rn vector.
    ProjectQ,
    /// Simulated paths and density process.
    Simulate,
    /// Realized against coefficient AMPR².
    Ampr,
    /// Canonical Bachelier image of simulated paths, with Lévy gates.
    CanonicalizeCts,
    /// One-fund replication error across rebalance intervals.
    Replicate,
    /// Monte Carlo prices of the spec's claims.
    Price,
    /// Every applicable check for the spec's market.
    Verify,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Debug, Parser)]
#[command(name = "isomarket", version, about = "Market classification, canonical forms and checks")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Market spec file (JSON); `classify` and `canon-gauss` accept two.
    #[arg(long = "spec", required = true)]
    pub specs: Vec<PathBuf>,
    /// Defaults to the spec's run block, then 42.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long = "casino-grid")]
    pub casino_grid: Option<usize>,
}

fn resolve(cli: &Cli, specs: &[LoadedSpec]) -> Result<Settings, CliError> {
    let run = &specs[0].file.run;
    if !(cli.alpha > 0.0 && cli.alpha < 1.0) {
        return Err(CliError::Invalid(format!("--alpha must lie in (0, 1), got {}", cli.alpha)));
    }
    let horizon = specs[0].file.sde.as_ref().map(|s| s.horizon);
    let steps = match (cli.steps.or(run.steps), run.dt, horizon) {
        (Some(n), _, _) => Some(n),
        (None, Some(dt), Some(t)) => {
            let n = (t / dt).round();
            if !(dt > 0.0) || n < 1.0 || (n * dt - t).abs() > 1e-9 * t.max(1.0) {
                return Err(CliError::Invalid(format!(
                    "{}: at `run.dt`: {dt} does not divide the horizon {t}",
                    specs[0].name
                )));
            }
            Some(n as usize)
        }
        _ => None,
    };
    if steps == Some(0) {
        return Err(CliError::Invalid("--steps must be positive".into()));
    }
    let paths = cli.paths.or(run.paths).unwrap_or(DEFAULT_PATHS);
    let casino_grid = cli.casino_grid.or(run.casino_grid).unwrap_or(DEFAULT_CASINO_GRID);
    if paths < 2 || casino_grid == 0 {
        return Err(CliError::Invalid("need at least 2 paths and a positive casino grid".into()));
    }
    Ok(Settings {
        seed: cli.seed.or(run.seed).unwrap_or(DEFAULT_SEED),
        paths,
        steps,
        alpha: cli.alpha,
        casino_grid,
        antithetic: run.antithetic.unwrap_or(false),
        hedge_strides: run.hedge_strides.clone().unwrap_or(DEFAULT_HEDGE_STRIDES.to_vec()),
    })
}

fn command_echo(cli: &Cli, specs: &[LoadedSpec], s: &Settings) -> String {
    let mut parts = vec!["isomarket".to_string(), cli.command.name()];
    for spec in specs {
        parts.push(format!("--spec {}", spec.name));
    }
    parts.push(format!("--seed {} --paths {}", s.seed, s.paths));
    if let Some(n) = s.steps {
        parts.push(format!("--steps {n}"));
    }
    parts.push(format!("--alpha {} --casino-grid {}", s.alpha, s.casino_grid));
    parts.join(" ")
}

/// Runs a parsed command without touching the filesystem beyond reading specs.
pub fn execute(cli: &Cli) -> Result<RunReport, CliError> {
    if cli.specs.len() > 2 {
        return Err(CliError::Invalid("at most two --spec files".into()));
    }
    let specs = cli.specs.iter().map(|p| load_spec(p)).collect::<Result<Vec<_>, _>>()?;
    let settings = resolve(cli, &specs)?;
    let config = json!({
        "binary": env!("CARGO_PKG_VERSION"),
        "command": cli.command.name(),
        "specs": specs.iter().map(|s| s.document.clone()).collect::<Vec<_>>(),
        "settings": settings,
    });
    let outcome = run_command(cli.command, &specs, &settings)?;
    Ok(RunReport {
        command: command_echo(cli, &specs, &settings),
        config_hash: config_hash(&config),
        outcome,
    })
}

/// Full CLI entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = report.write(&cli.out) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    print!("{}", report.summary());
    if report.outcome.failed() {
        1
    } else {
        0
    }
}

//! `qpos`: configuration-driven runs of the positivity toolkit.
//!
//! Exit codes: 0 when a run completes (whatever the verdict), 2 for
//! configuration errors, 3 for internal invariant violations.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Marks errors caused by the user's configuration or arguments.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Parser)]
#[command(
    name = "qpos",
    version,
    about = "Partial positivity of line bundles on flat complex tori"
)]
pub struct Cli {
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for JSON reports and CSV fields.
    #[arg(long, global = true, env = "QPOS_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
    /// Corpus seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Run the equivalence suite on this many random instances.
    #[arg(long, global = true)]
    pub corpus: Option<usize>,
    /// Samples per real axis, overriding the configured grid.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Relative positivity threshold, overriding `tolerances.eps_pos_rel`.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Subcommand)]
pub enum Command {
    /// Pointwise and uniform q-positivity of the curvature.
    CheckQpos,
    /// Build the metric that makes a q-positive curvature uniformly q-positive.
    Uniformize,
    /// Conformally normalize to constant scalar curvature against the configured metric.
    NormalizeScalar,
    /// Search for a metric pair with positive scalar curvature.
    Certify,
    /// Pseudo-effectivity of the class and of its dual.
    PsefTest,
    /// Four-way equivalence on one instance, or on a random corpus with --corpus.
    EquivalenceSuite,
    /// Write weight, scalar curvature and curvature eigenvalues as CSV.
    DumpField,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckQpos => "check-qpos",
            Command::Uniformize => "uniformize",
            Command::NormalizeScalar => "normalize-scalar",
            Command::Certify => "certify",
            Command::PsefTest => "psef-test",
            Command::EquivalenceSuite => "equivalence-suite",
            Command::DumpField => "dump-field",
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<qpos_core::Error>() {
            return if e.is_configuration() { 2 } else { 3 };
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

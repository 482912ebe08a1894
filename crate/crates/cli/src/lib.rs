//! Configuration, orchestration and output for `shiftbc` experiments.
//!
//! A run reads an [`ExperimentConfig`] (JSON), applies command-line
//! overrides, executes one [`Command`] and writes a row file plus
//! `summary.json`, or `error.json` and a `#failed` marker on failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, Command, Failure, Outcome};
pub use config::ExperimentConfig;

use config::Format;

#[derive(Debug, Parser)]
#[command(
    name = "shiftbc",
    version,
    about = "Strong Borel-Cantelli experiments on shift spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Mixing coefficients φ(k), ψ(k) of the model.
    Mix(Overrides),
    /// Counting checks on the index family.
    CheckQ(Overrides),
    /// Nonconventional sums S_N against E_N.
    BcRun(Overrides),
    /// Shannon-McMillan-Breiman entropy estimates.
    Entropy(Overrides),
    /// Maxima of the log-distance M_N.
    Maxlog(Overrides),
    /// Hitting times of shrinking cylinders and their exponent fit.
    Hit(Overrides),
}

/// Flags that replace the matching config values.
#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicates: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    pub format: Option<Format>,
    /// Worker threads for replicates; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub cap: Option<u64>,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub k_max: Option<u64>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        _ => Err(format!("unknown format {s:?}; use csv or json")),
    }
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        macro_rules! set {
            ($($flag:ident => $field:expr),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { $field = v; })*
            };
        }
        set!(
            seed => cfg.seed,
            replicates => cfg.replicates,
            out => cfg.output.dir,
            format => cfg.output.format,
            n => cfg.n,
            cap => cfg.cap,
            horizon => cfg.horizon,
            gamma => cfg.gamma,
            epsilon => cfg.epsilon,
            c => cfg.c,
            k_max => cfg.k_max,
        );
    }
}

impl CliCommand {
    fn parts(&self) -> (Command, &Overrides) {
        match self {
            CliCommand::Mix(o) => (Command::Mix, o),
            CliCommand::CheckQ(o) => (Command::CheckQ, o),
            CliCommand::BcRun(o) => (Command::BcRun, o),
            CliCommand::Entropy(o) => (Command::Entropy, o),
            CliCommand::Maxlog(o) => (Command::Maxlog, o),
            CliCommand::Hit(o) => (Command::Hit, o),
        }
    }
}

/// Exit status when the config cannot be read or parsed.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit status when outputs cannot be written.
pub const EXIT_IO: i32 = 1;

/// Runs one command and writes its outputs; returns the exit status.
pub fn execute(command: Command, cfg: &ExperimentConfig, threads: usize) -> i32 {
    let outcome = run(command, cfg, threads);
    if let Err(e) = output::write(command, cfg, &outcome) {
        eprintln!(
            "shiftbc: cannot write outputs to {}: {e}",
            cfg.output.dir.display()
        );
        return EXIT_IO;
    }
    match &outcome.failure {
        None => 0,
        Some(f) => {
            eprintln!("shiftbc {}: {}", command.name(), f.message());
            f.exit_code()
        }
    }
}

/// Parses arguments, loads and overrides the config, and executes.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { 0 };
        }
    };
    let (command, overrides) = cli.command.parts();
    let mut cfg = match &overrides.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("shiftbc: {e}");
                return EXIT_VALIDATION;
            }
        },
        None => ExperimentConfig::default(),
    };
    overrides.apply(&mut cfg);
    execute(command, &cfg, overrides.threads)
}

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::commands::CommandError;
use crate::config::Format;
use crate::output::Report;

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_CONTRACT: u8 = 3;
const EXIT_USAGE: u8 = 64;

/// Exact decoherence laboratory: threshold sweeps, oracle cross-checks and
/// lemma verification for band-limited measurement models.
#[derive(Debug, Parser)]
#[command(name = "decolab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the decoherence and orthogonality thresholds.
    Thresholds(RunArgs),
    /// Sweep the system-probe coupling and tabulate coherences.
    CoherenceSweep(RunArgs),
    /// Pointer-state overlaps and projector checks per coupling.
    Orthogonality(RunArgs),
    /// Compare the analytic reduced state with the dense oracle.
    DenseCheck(RunArgs),
    /// Verify the band-limited lemma for the probe and pointer states.
    Lemma(RunArgs),
    /// Two-body premeasurement state and Gaussian suppression factors.
    Baseline(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Write the result here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; overrides the configuration.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Seed for randomized frequency draws.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    ExitCode::from(run(cli.command))
}

fn run(command: Command) -> u8 {
    let (args, runner): (&RunArgs, fn(&config::ExperimentConfig, &str, Option<u64>) -> Result<Report, CommandError>) =
        match &command {
            Command::Thresholds(a) => (a, |c, h, _| commands::run_thresholds(c, h)),
            Command::CoherenceSweep(a) => (a, |c, h, _| commands::run_coherence_sweep(c, h)),
            Command::Orthogonality(a) => (a, |c, h, _| commands::run_orthogonality(c, h)),
            Command::DenseCheck(a) => (a, |c, h, _| commands::run_dense_check(c, h)),
            Command::Lemma(a) => (a, commands::run_lemma),
            Command::Baseline(a) => (a, |c, h, _| commands::run_baseline(c, h)),
        };
    let loaded = match config::load(&args.config) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    let report = match runner(&loaded.config, &loaded.hash, args.seed) {
        Ok(r) => r,
        Err(e @ CommandError::Setup(_)) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
        Err(e @ CommandError::Numerical(_)) => {
            eprintln!("error: {e}");
            return EXIT_CONTRACT;
        }
    };
    let format = args.format.unwrap_or(loaded.config.output.format);
    let text = match format {
        Format::Csv => report.table.to_csv(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.json).expect("reports serialize");
            s.push('\n');
            s
        }
    };
    let path = args.out.clone().or_else(|| loaded.config.output.path.as_ref().map(PathBuf::from));
    if let Err(e) = emit(path.as_deref(), &text) {
        eprintln!("error: cannot write output: {e}");
        return EXIT_IO;
    }
    if report.violations.is_empty() {
        0
    } else {
        for v in &report.violations {
            eprintln!("contract violation: {v}");
        }
        EXIT_CONTRACT
    }
}

fn emit(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

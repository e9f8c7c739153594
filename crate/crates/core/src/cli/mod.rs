//! Command-line experiment runner.
//!
//! ```text
//! nfsg run --config <path> --experiment <name> --seed <u64> --trials <n> --out <path> [--format csv|jsonl]
//! nfsg validate --config <path>
//! ```
//!
//! `NFSG_THREADS` sets the number of worker threads. Exit codes: 0 success,
//! 1 configuration error, 2 I/O error, 3 every row failed numerically.

mod config;
mod output;
mod run;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{
    apply_sweep, emit_config, parse_config, Experiment, ExperimentSpec, Mode, Sweep, SweepParam, Target,
};
pub use output::{emit_results, write_results, OutputFormat, COLUMNS};
pub use run::{run_experiment, ResultRow, ResultTable};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nfsg", version, about = "Near-field beamfocusing coverage experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one named experiment and write its result table.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// pattern-cut, polar-heatmap, cond-cp, m-sweep, overall, ase-vs-n,
        /// ase-vs-na or ratio-sweep.
        #[arg(long)]
        experiment: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Monte Carlo trials per sweep point.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Parse and check a configuration file.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &PathBuf) -> Result<ExperimentSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Executes a parsed command; diagnostics go to stderr.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { config } => {
            let spec = load(&config)?;
            if let Some(exp) = spec.name {
                spec.validate_for(exp)?;
            }
            println!("{}: ok", config.display());
            Ok(())
        }
        Command::Run {
            config,
            experiment,
            seed,
            trials,
            out,
            format,
        } => {
            let mut spec = load(&config)?;
            let exp = Experiment::from_name(&experiment).ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                CliError::Config(format!("unknown experiment {experiment:?}; expected one of {}", names.join(", ")))
            })?;
            spec.name = Some(exp);
            if let Some(s) = seed {
                spec.seed = s;
            }
            if let Some(t) = trials {
                spec.n_trials = t;
            }
            if out.is_some() {
                spec.output_path = out;
            }
            let path = spec
                .output_path
                .clone()
                .ok_or_else(|| CliError::Config("no output path: pass --out or set experiment.output".into()))?;
            spec.validate()?;
            let table = run_experiment(&spec)?;
            for d in &table.diagnostics {
                eprintln!("warning: {d}");
            }
            emit_results(&table, &path, format)?;
            if table.all_failed() {
                return Err(CliError::Numeric(format!("all {} rows failed", table.rows.len())));
            }
            Ok(())
        }
    }
}

/// Applies `NFSG_THREADS` to the global worker pool.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("NFSG_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("NFSG_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("NFSG_THREADS: {e}")))
}

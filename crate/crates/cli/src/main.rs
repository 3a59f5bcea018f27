/// `println!` that ignores a closed stdout.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{ArgAction, Parser, Subcommand};

use crate::config::{Overrides, RunConfig};

/// BVP pain-assessment pipeline.
#[derive(Debug, Parser)]
#[command(name = "bvpain", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Master seed for the cohort, the splits and the models.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Task name (NP-HP, LP-MP-HP, regression, ...) or `all`.
    #[arg(long, global = true)]
    task: Option<String>,
    /// Model family (logreg, linsvm, rforest, adaboost, gbt, ...).
    #[arg(long, global = true)]
    model: Option<String>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic cohort with a manifest.
    Synth,
    /// Validate the recordings listed in a manifest.
    Ingest { manifest: Option<PathBuf> },
    /// Build the windowed feature table.
    Extract { manifest: Option<PathBuf> },
    /// Tune, cross-validate and report a model.
    TrainEval { features: Option<PathBuf> },
    /// Fold-averaged extra-trees feature importance.
    Importance { features: Option<PathBuf> },
    /// Kruskal-Wallis and Dunn's test of features across pain states.
    Stats {
        features: Option<PathBuf>,
        /// Feature to analyse; repeatable.
        #[arg(long = "feature", value_name = "NAME")]
        feature: Vec<String>,
    },
}

fn run(cli: Cli) -> Result<()> {
    let flags = Overrides {
        seed: cli.seed,
        task: cli.task,
        model: cli.model,
        out: cli.out,
    };
    let mut cfg = RunConfig::load(cli.config.as_deref(), &flags)?;
    match cli.command {
        Command::Synth => commands::synth(&cfg),
        Command::Ingest { manifest } => {
            cfg.paths.manifest = manifest.or(cfg.paths.manifest);
            commands::ingest(&cfg)
        }
        Command::Extract { manifest } => {
            cfg.paths.manifest = manifest.or(cfg.paths.manifest);
            commands::extract(&cfg)
        }
        Command::TrainEval { features } => {
            cfg.paths.features = features.or(cfg.paths.features);
            commands::train_eval(&cfg)
        }
        Command::Importance { features } => {
            cfg.paths.features = features.or(cfg.paths.features);
            commands::importance(&cfg)
        }
        Command::Stats { features, feature } => {
            cfg.paths.features = features.or(cfg.paths.features);
            if !feature.is_empty() {
                cfg.stats.features = feature;
            }
            commands::stats(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { failure::USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(failure::exit_code(&e))
        }
    }
}

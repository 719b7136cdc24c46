//! `mtan`: preprocess, build vocabularies, train, evaluate, predict,
//! gradient-check and report for the multi-task attention network.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage or configuration error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "mtan",
    version,
    about = "Multi-task attention network for sentiment and emotion"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Flat `key = value` run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalise text given as arguments, or the configured corpora.
    Preprocess { text: Vec<String> },
    /// Build the vocabulary and candidate lists from the configured resources.
    BuildVocab,
    /// Train, then write checkpoint, metrics and epoch log.
    Train,
    /// Score a checkpoint on a corpus.
    Evaluate {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Defaults to corpus.test, then corpus.train.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Print labels and probabilities for one text.
    Predict {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        text: Vec<String>,
    },
    /// Finite-difference check of every parameter gradient.
    Gradcheck {
        /// Comma-separated modes; all six by default.
        #[arg(long, value_delimiter = ',')]
        modes: Vec<String>,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Render metrics files as tables, with a seed-paired t-test when two
    /// modes are present.
    Report {
        #[arg(required = true)]
        metrics: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match cli.command {
        Command::Preprocess { text } => commands::preprocess(g, &text),
        Command::BuildVocab => commands::build_vocab(g),
        Command::Train => commands::train(g),
        Command::Evaluate { checkpoint, corpus } => commands::evaluate(g, checkpoint, corpus),
        Command::Predict { checkpoint, text } => commands::predict(g, checkpoint, &text),
        Command::Gradcheck {
            modes,
            inject_fault,
        } => commands::gradcheck(g, &modes, inject_fault),
        Command::Report { metrics } => commands::report(g, &metrics),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code)
        }
    }
}

//! `enose`: command-line front end for the incipient-fire odour pipeline.

mod commands;
mod config;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use enose_core::data::DataError;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "enose",
    version,
    about = "E-nose feature extraction, fusion and classification"
)]
#[command(after_help = "Examples:
  enose generate --seed 7 -o data/
  enose extract --input data/dataset.csv --feature rssv -o rssv.csv
  enose pipeline --input data/dataset.csv --spread 0.08 --reps 50 --seed 1 -o report/
  enose eval --confusion report/confusion.csv")]
struct Cli {
    #[command(flatten)]
    common: config::Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a seeded synthetic dataset (and recordings) to the output directory
    Generate(commands::GenerateArgs),
    /// Apply one baseline-correction feature to a dataset or recording CSV
    Extract(commands::ExtractArgs),
    /// Rank features by repeated PNN test accuracy
    RankFeatures(commands::DatasetArgs),
    /// Sweep PCA component counts for the selected features
    PcaSweep(commands::PcaSweepArgs),
    /// Fuse PCA scores of several features into one hybrid feature CSV
    Fuse(commands::FuseArgs),
    /// Fit a PNN on a feature CSV and save it as JSON
    Train(commands::TrainArgs),
    /// Compute fire/no-fire metrics for a model and test CSV, or a confusion matrix
    Eval(commands::EvalArgs),
    /// Run ranking, PC sweep, fusion and final evaluation; write a report directory
    Pipeline(commands::PipelineArgs),
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    let common = &cli.common;
    match cli.command {
        Command::Generate(args) => commands::generate(&args, common),
        Command::Extract(args) => commands::extract(&args, common),
        Command::RankFeatures(args) => commands::rank_features(&args, common),
        Command::PcaSweep(args) => commands::pca_sweep(&args, common),
        Command::Fuse(args) => commands::fuse(&args, common),
        Command::Train(args) => commands::train(&args, common),
        Command::Eval(args) => commands::eval(&args, common),
        Command::Pipeline(args) => commands::pipeline(&args, common),
    }
}

/// Joins the error chain with `: `, skipping causes whose text the previous
/// message already ends with.
fn one_line(e: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !msg.ends_with(&text) {
            if !msg.is_empty() {
                msg.push_str(": ");
            }
            msg.push_str(&text);
        }
    }
    msg.replace('\n', " ")
}

/// A closed stdout (e.g. piping into `head`) is not a failure.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let io = c
            .downcast_ref::<std::io::Error>()
            .or_else(|| match c.downcast_ref::<DataError>() {
                Some(DataError::Io(io)) => Some(io),
                _ => None,
            });
        io.is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            eprintln!("error: a subcommand is required (see --help)");
            return ExitCode::from(2);
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let parts: Vec<&str> = rendered
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("{}", parts.join(" "));
            return ExitCode::from(2);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            ExitCode::FAILURE
        }
    }
}

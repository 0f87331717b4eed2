use std::path::PathBuf;
use std::process::ExitCode;

use biont::config::RunConfig;
use biont::pipeline;
use biont::PipelineError;
use clap::{Parser, Subcommand};

/// Ontology-enriched biomedical relation extraction.
#[derive(Parser)]
#[command(name = "biont", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turn a corpus into instances and a diagnostics report.
    Preprocess {
        #[arg(long)]
        config: PathBuf,
        /// Corpus file or directory; defaults to the configured corpus_path.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Instances file; the report goes to `<out>.diagnostics.tsv`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model; the epoch history goes to `<out>.history.tsv`.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print or write precision, recall and F-score.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write one prediction per instance as JSON lines.
    Predict {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
}

fn run(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Preprocess { config, input, out } => {
            let config = RunConfig::load(&config)?;
            pipeline::cmd_preprocess(&config, input.as_deref(), &out)?;
        }
        Command::Train { config, input, out } => {
            let config = RunConfig::load(&config)?;
            pipeline::cmd_train(&config, &input, &out)?;
        }
        Command::Evaluate {
            config,
            model,
            input,
            out,
        } => {
            let config = RunConfig::load(&config)?;
            let report = pipeline::cmd_evaluate(&config, &model, &input, out.as_deref())?;
            if out.is_none() {
                print!("{report}");
            }
        }
        Command::Predict {
            config,
            model,
            input,
            out,
            threshold,
        } => {
            RunConfig::load(&config)?;
            pipeline::cmd_predict(&model, &input, &out, threshold)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

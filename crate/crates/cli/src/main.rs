//! `ecg-bench`: synthesize, preprocess, train, evaluate and gradient-check.
//!
//! Exit codes: 0 success, 1 failed check, 2 bad input data, 64 usage error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CliError, ModelArg};

#[derive(Debug, Parser)]
#[command(name = "ecg-bench", version, about = "12-lead ECG classification workbench")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment config (JSON); built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed override for the command's random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the synthetic record set and its manifest.
    Synth {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Denoise, project and normalize every record into a feature tensor.
    /// `--seed` sets the split seed the PCA and scaler are fitted under.
    Preprocess {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train one network (or the SVM baseline) and write checkpoint + history.
    Train {
        #[arg(long)]
        tensor: Option<PathBuf>,
        /// CNN, GRU, LSTM, ATTN, BIGRU, BILSTM or SVM.
        #[arg(long)]
        model: ModelArg,
        /// Split seed, when the tensor was built with a `--seed` override.
        #[arg(long)]
        split_seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score checkpoints on the test split; writes report.json and
    /// comparison.svg. `--seed` is the split seed.
    Evaluate {
        #[arg(long)]
        tensor: Option<PathBuf>,
        /// Checkpoints to compare; every `*.ckpt.json` under the runs
        /// directory when omitted.
        checkpoints: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Central-difference gradient check at T=16, C=3, H=8.
    Gradcheck {
        #[arg(long, required_unless_present = "all", conflicts_with = "all")]
        model: Option<ModelArg>,
        #[arg(long)]
        all: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = &cli.common;
    match cli.command {
        Command::Synth { out } => commands::synth(common, out),
        Command::Preprocess { manifest, out } => commands::preprocess(common, manifest, out),
        Command::Train {
            tensor,
            model,
            split_seed,
            out,
        } => commands::train(common, tensor, model, split_seed, out),
        Command::Evaluate {
            tensor,
            checkpoints,
            out,
        } => commands::evaluate(common, tensor, checkpoints, out),
        Command::Gradcheck { model, all } => commands::gradcheck(common, model, all),
    }
}

fn main() -> ExitCode {
    let parsed = match Cli::try_parse() {
        Ok(p) => p,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(64) } else { ExitCode::SUCCESS };
        }
    };
    match run(parsed) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! `milmap` — generate synthetic MIL datasets, evaluate the classifier zoo,
//! compute dataset distances, and embed the dataset space in 2D.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal numerical
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "milmap", version, about = "Characterize MIL datasets by classifier behavior")]
pub struct Cli {
    /// Seed for generation and evaluation (default 42)
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Cross-validation folds (default 10)
    #[arg(long, global = true)]
    pub folds: Option<usize>,

    /// Worker threads for the evaluation grid; 0 means all cores (default 0)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Output file or directory, depending on the subcommand
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write the six artificial datasets (or a subset) as CSV plus sidecar
    /// generator specs. `--out` is a directory.
    Gen {
        /// Generate all six kinds (the default when --kinds is omitted)
        #[arg(long)]
        all: bool,
        /// Comma-separated kind names: gaussian, maron, concept, difficult,
        /// rotated, widened
        #[arg(long, value_delimiter = ',')]
        kinds: Vec<String>,
    },
    /// Cross-validate classifiers on datasets and write the evaluation
    /// matrix. `--out` is the matrix file (default eval.txt).
    Eval {
        /// Dataset CSV files
        #[arg(long, num_args = 1.., required = true)]
        data: Vec<PathBuf>,
        /// Comma-separated classifier display names (default: the full
        /// 22-classifier catalog)
        #[arg(long, value_delimiter = ',')]
        classifiers: Vec<String>,
    },
    /// Compute the metadata, AUC-vector, and ROC-difference distance
    /// matrices from an evaluation matrix. `--out` is a directory.
    Dist {
        /// Evaluation matrix file written by `eval`
        #[arg(long)]
        eval: PathBuf,
        /// The dataset CSV files the matrix was computed from (for metadata)
        #[arg(long, num_args = 1.., required = true)]
        data: Vec<PathBuf>,
    },
    /// Embed a distance matrix in 2D by classical scaling. `--out` is the
    /// embedding file (default embedding.csv).
    Embed {
        /// Distance matrix CSV
        #[arg(long)]
        dist: PathBuf,
    },
    /// Evaluate a new dataset under the stored protocol and append its 2D
    /// placement to an embedding file.
    Oos {
        /// Evaluation matrix of the base datasets
        #[arg(long)]
        eval: PathBuf,
        /// Embedding file to extend (modified in place)
        #[arg(long)]
        embedding: PathBuf,
        /// The new dataset CSV
        #[arg(long)]
        data: PathBuf,
        /// Distance used for placement: roc or auc
        #[arg(long, default_value = "roc")]
        metric: String,
    },
    /// Classifier-diversity report: pairwise-distance correlations and PCA
    /// cumulative variance. `--out` is a directory.
    Diversity {
        /// Evaluation matrix file
        #[arg(long)]
        eval: PathBuf,
    },
    /// Plot-ready table joining embedding coordinates with mean AUC and one
    /// classifier's AUC per dataset. `--out` is the table file (default
    /// plotdata.csv).
    Plotdata {
        /// Evaluation matrix file
        #[arg(long)]
        eval: PathBuf,
        /// Embedding file
        #[arg(long)]
        embedding: PathBuf,
        /// Classifier whose AUC colors the plot
        #[arg(long, default_value = "emdd")]
        classifier: String,
    },
}

/// Errors carry the exit code they map to.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => m,
        }
    }
}

impl From<milmap::DataError> for CliError {
    fn from(e: milmap::DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<milmap::GenError> for CliError {
    fn from(e: milmap::GenError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<milmap::EvalError> for CliError {
    fn from(e: milmap::EvalError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<milmap::DistanceError> for CliError {
    fn from(e: milmap::DistanceError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<milmap::EmbedError> for CliError {
    fn from(e: milmap::EmbedError) -> Self {
        CliError::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

//! `cgd`: detect crowdturfing task listings in a marketplace corpus.
//!
//! Exit codes: 0 success, 1 domain/validation error, 2 usage error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cgd_core::corpus::Label;
use config::PipelineOpts;

#[derive(Parser)]
#[command(
    name = "cgd",
    version,
    about = "Crowdturfing gig detection: synthesize, featurize, train, evaluate, predict, analyze"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a deterministic synthetic labeled corpus
    Synth(SynthArgs),
    /// Load, validate, and optionally normalize a corpus
    Ingest(IngestArgs),
    /// Export the feature matrix for a corpus
    Featurize(FeaturizeArgs),
    /// Rank vocabulary terms by chi-square against the labels
    RankFeatures(RankArgs),
    /// Train the stage-1 detector (and optionally the stage-2 type model)
    Train(TrainArgs),
    /// Stratified k-fold cross-validation of the stage-1 detector
    Evaluate(EvaluateArgs),
    /// Two-stage wild detection over a corpus
    Predict(PredictArgs),
    /// Corpus and case-study analytics
    Analyze {
        #[command(subcommand)]
        command: AnalyzeCommand,
    },
}

#[derive(clap::Args)]
struct SynthArgs {
    #[command(flatten)]
    common: PipelineOpts,
    /// Number of gigs to generate
    #[arg(long, default_value_t = 2000)]
    n: u32,
    /// Crowdturfing fraction
    #[arg(long, default_value_t = 0.06)]
    fraction: f64,
    /// Social,search,traffic type weights
    #[arg(long, default_value = "65,47,9")]
    type_weights: String,
    /// Probability of drawing a noise token instead of a class token
    #[arg(long, default_value_t = 0.2)]
    noise_rate: f64,
    /// Disable the buyer-distribution shift for crowdturfing gigs
    #[arg(long)]
    no_metadata_shift: bool,
    /// Corpus output path (default: <output-dir>/corpus.jsonl)
    #[arg(long)]
    out_corpus: Option<PathBuf>,
    /// Label sidecar output path (default: <output-dir>/labels.jsonl)
    #[arg(long)]
    out_labels: Option<PathBuf>,
}

#[derive(clap::Args)]
struct IngestArgs {
    #[command(flatten)]
    common: PipelineOpts,
    /// Abort on the first malformed line instead of skipping
    #[arg(long)]
    strict: bool,
    /// Write the normalized corpus here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct FeaturizeArgs {
    #[command(flatten)]
    common: PipelineOpts,
    /// Feature matrix output path (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the vocabulary file here
    #[arg(long)]
    vocab_out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct RankArgs {
    #[command(flatten)]
    common: PipelineOpts,
    /// Keep only the N highest-scoring terms
    #[arg(long)]
    top: Option<usize>,
    /// Ranked-terms output path (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct TrainArgs {
    #[command(flatten)]
    common: PipelineOpts,
    /// Stage-1 algorithm: svm or nb
    #[arg(long, default_value = "svm")]
    algorithm: String,
    /// Additive smoothing for nb
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Model output path (default: <output-dir>/model.cgdm)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Vocabulary output path (default: <model>.vocab)
    #[arg(long)]
    vocab_out: Option<PathBuf>,
    /// Also train the one-vs-rest type classifier and write it here
    #[arg(long)]
    stage2_out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: PipelineOpts,
    /// Report output path (default: <output-dir>/cv_report.json)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct PredictArgs {
    #[command(flatten)]
    common: PipelineOpts,
    /// Stage-1 model file
    #[arg(long)]
    model: PathBuf,
    /// Vocabulary file (default: <model>.vocab)
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Stage-2 one-vs-rest model file
    #[arg(long)]
    stage2: Option<PathBuf>,
    /// Label sidecar naming training gigs: they and their sellers' other
    /// gigs are removed before prediction
    #[arg(long)]
    holdout_labels: Option<PathBuf>,
    /// Prediction TSV output path (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Unigram frequencies over gig titles
    Words {
        #[command(flatten)]
        common: PipelineOpts,
        /// Keep only the N most frequent terms
        #[arg(long)]
        top: Option<usize>,
        /// Restrict to gigs with this label (requires --labels)
        #[arg(long, value_parser = commands::parse_only)]
        only: Option<Label>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Histogram of advertised PageRank scores
    Pagerank {
        #[command(flatten)]
        common: PipelineOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CDF of promised visitor counts
    Visitors {
        #[command(flatten)]
        common: PipelineOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Targeted social media sites
    Sites {
        #[command(flatten)]
        common: PipelineOpts,
        /// Lexicon file (token<TAB>site per line; default: built-in)
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Market size and top sellers
    Market {
        #[command(flatten)]
        common: PipelineOpts,
        /// How many top sellers to report
        #[arg(long, default_value_t = 10)]
        top: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cumulative created-gig counts per year
    Timeline {
        #[command(flatten)]
        common: PipelineOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Crawl coverage from a sampling probe
    Coverage {
        /// Ids probed
        #[arg(long)]
        sampled: u64,
        /// Probed ids still active
        #[arg(long)]
        active: u64,
        /// Active ids present in the crawl
        #[arg(long)]
        overlap: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

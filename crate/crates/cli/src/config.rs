//! Config resolution: defaults, then the TOML config file, then command-line
//! flags. Every run logs the fully resolved config (including the defaulted
//! seed) to standard error so any output is reproducible from its log line.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use cgd_core::corpus::Label;
use cgd_core::features::{FeatureSpec, TextFields};
use cgd_core::model::TrainConfig;

/// Flags shared by the pipeline subcommands. Anything left unset falls back
/// to the config file, then to the built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct PipelineOpts {
    /// TOML config file; flags override file values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Corpus file (JSON Lines)
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Label sidecar file (JSON Lines)
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Directory for default output paths
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Text fields feeding the bag of words: none|title|description|both
    #[arg(long)]
    pub text_fields: Option<String>,
    /// Stop-word list id (en-v1 or none)
    #[arg(long)]
    pub stopwords: Option<String>,
    /// Minimum document frequency for vocabulary terms
    #[arg(long)]
    pub min_df: Option<u32>,
    /// Fixed world-domination-rate denominator (default: derived from corpus)
    #[arg(long)]
    pub wdr_denominator: Option<u32>,
    /// Regularization constant C
    #[arg(long)]
    pub c: Option<f64>,
    /// Maximum training epochs
    #[arg(long)]
    pub epochs: Option<u32>,
    /// Convergence tolerance on the training objective
    #[arg(long)]
    pub tol: Option<f64>,
    /// Seed for every randomized step
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of cross-validation folds
    #[arg(long)]
    pub k: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    corpus: Option<PathBuf>,
    labels: Option<PathBuf>,
    output_dir: Option<PathBuf>,
    k: Option<u32>,
    seed: Option<u64>,
    #[serde(default)]
    features: FeatureSection,
    #[serde(default)]
    train: TrainSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FeatureSection {
    text_fields: Option<String>,
    stopwords: Option<String>,
    min_df: Option<u32>,
    wdr_denominator: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainSection {
    c: Option<f64>,
    max_epochs: Option<u32>,
    tol: Option<f64>,
}

/// Fully resolved run configuration.
#[derive(Debug, Serialize)]
pub struct Resolved {
    pub corpus: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub k: u32,
    pub seed: u64,
    pub spec: FeatureSpec,
    pub train: TrainConfig,
}

fn parse_text_fields(value: &str) -> Result<TextFields> {
    match value {
        "none" => Ok(TextFields::None),
        "title" => Ok(TextFields::Title),
        "description" => Ok(TextFields::Description),
        "both" => Ok(TextFields::Both),
        other => anyhow::bail!("bad text_fields value {other:?} (none|title|description|both)"),
    }
}

pub fn resolve(opts: &PipelineOpts) -> Result<Resolved> {
    let file: FileConfig = match &opts.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?
        }
        None => FileConfig::default(),
    };

    let mut spec = FeatureSpec::default();
    let text_fields = opts.text_fields.clone().or(file.features.text_fields);
    if let Some(tf) = text_fields {
        spec.text_fields = parse_text_fields(&tf)?;
    }
    if let Some(sw) = opts.stopwords.clone().or(file.features.stopwords) {
        spec.stopword_list = sw;
    }
    if let Some(min_df) = opts.min_df.or(file.features.min_df) {
        spec.min_df = min_df;
    }
    spec.wdr_denominator = opts.wdr_denominator.or(file.features.wdr_denominator);

    let seed = opts.seed.or(file.seed).unwrap_or(42);
    let mut train = TrainConfig {
        seed,
        positive_class: Label::Crowdturfing,
        ..TrainConfig::default()
    };
    if let Some(c) = opts.c.or(file.train.c) {
        train.c = c;
    }
    if let Some(epochs) = opts.epochs.or(file.train.max_epochs) {
        train.max_epochs = epochs;
    }
    if let Some(tol) = opts.tol.or(file.train.tol) {
        train.tol = tol;
    }

    let resolved = Resolved {
        corpus: opts.corpus.clone().or(file.corpus),
        labels: opts.labels.clone().or(file.labels),
        output_dir: opts
            .output_dir
            .clone()
            .or(file.output_dir)
            .unwrap_or_else(|| PathBuf::from(".")),
        k: opts.k.or(file.k).unwrap_or(10),
        seed,
        spec,
        train,
    };
    eprintln!(
        "config: {}",
        serde_json::to_string(&resolved).expect("config serializes")
    );
    Ok(resolved)
}

impl Resolved {
    pub fn corpus_path(&self) -> Result<&PathBuf> {
        self.corpus
            .as_ref()
            .context("no corpus path (pass --corpus or set it in the config file)")
    }

    pub fn labels_path(&self) -> Result<&PathBuf> {
        self.labels
            .as_ref()
            .context("no labels path (pass --labels or set it in the config file)")
    }
}

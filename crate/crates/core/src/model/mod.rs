//! Stage-1 binary detector (linear soft-margin classifier), the Naive Bayes
//! baseline, and the stage-2 one-vs-rest type classifier.
//!
//! Trained models are immutable and thread-shareable; scoring is pure.

mod naive_bayes;
mod persist;
mod svm;

pub use naive_bayes::{train_nb, NaiveBayesModel};
pub use persist::{load_model, save_model, Model};
pub use svm::{svm_gradient, svm_objective};

use serde::{Deserialize, Serialize};

use crate::corpus::{CrowdturfType, Label};
use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Training configuration for the linear classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Regularization constant; the objective uses `lambda = 1/(C*n)`.
    pub c: f64,
    pub max_epochs: u32,
    /// Stop when the epoch-to-epoch objective change drops below this.
    pub tol: f64,
    pub seed: u64,
    /// Which label scores positive.
    pub positive_class: Label,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: 1.0,
            max_epochs: 100,
            tol: 1e-6,
            seed: 42,
            positive_class: Label::Crowdturfing,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.c.is_nan() || self.c <= 0.0 {
            return Err(Error::precondition("C must be positive"));
        }
        if self.max_epochs == 0 {
            return Err(Error::precondition("max_epochs must be at least 1"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::precondition("tolerance must be positive"));
        }
        Ok(())
    }
}

/// A trained linear model: one weight per feature, a bias, and the dense-block
/// standardization statistics frozen from the training data.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub(crate) weights: Vec<f64>,
    pub(crate) bias: f64,
    pub(crate) sparse_dim: usize,
    pub(crate) dense_mean: Vec<f64>,
    pub(crate) dense_std: Vec<f64>,
    pub(crate) fingerprint: String,
    pub(crate) config: TrainConfig,
    pub(crate) objective: f64,
    pub(crate) epochs_run: u32,
}

impl LinearModel {
    /// Assemble a model from raw parts (persistence and tests).
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        weights: Vec<f64>,
        bias: f64,
        sparse_dim: usize,
        dense_mean: Vec<f64>,
        dense_std: Vec<f64>,
        fingerprint: impl Into<String>,
        config: TrainConfig,
        objective: f64,
        epochs_run: u32,
    ) -> Self {
        LinearModel {
            weights,
            bias,
            sparse_dim,
            dense_mean,
            dense_std,
            fingerprint: fingerprint.into(),
            config,
            objective,
            epochs_run,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Final value of the regularized objective at the returned weights.
    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn epochs_run(&self) -> u32 {
        self.epochs_run
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    fn dense_dim(&self) -> usize {
        self.weights.len() - self.sparse_dim
    }

    fn check_input(&self, x: &FeatureVector) -> Result<()> {
        if x.fingerprint != self.fingerprint {
            return Err(Error::FingerprintMismatch {
                expected: self.fingerprint.clone(),
                found: x.fingerprint.clone(),
            });
        }
        if x.dense.len() != self.dense_dim() {
            return Err(Error::precondition(format!(
                "dense block width {} does not match model ({})",
                x.dense.len(),
                self.dense_dim()
            )));
        }
        if let Some((idx, _)) = x
            .sparse
            .iter()
            .find(|(i, _)| *i as usize >= self.sparse_dim)
        {
            return Err(Error::precondition(format!(
                "sparse index {idx} out of range for model with {} text features",
                self.sparse_dim
            )));
        }
        Ok(())
    }

    /// The margin `w . x + b`, with the dense block standardized first.
    pub fn score(&self, x: &FeatureVector) -> Result<f64> {
        self.check_input(x)?;
        let mut s = self.bias;
        for &(i, v) in &x.sparse {
            s += self.weights[i as usize] * v;
        }
        for (j, &v) in x.dense.iter().enumerate() {
            let z = (v - self.dense_mean[j]) / self.dense_std[j];
            s += self.weights[self.sparse_dim + j] * z;
        }
        Ok(s)
    }

    /// Positive score is the positive class; an exact zero falls to the
    /// negative class (Legitimate, under the default configuration).
    pub fn classify(&self, x: &FeatureVector) -> Result<Label> {
        let score = self.score(x)?;
        let (pos, neg) = match self.config.positive_class {
            Label::Crowdturfing => (Label::Crowdturfing, Label::Legitimate),
            Label::Legitimate => (Label::Legitimate, Label::Crowdturfing),
        };
        Ok(if score > 0.0 { pos } else { neg })
    }
}

/// Stage-2 classifier: one binary model per crowdturfing type, fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct OneVsRestModel {
    pub(crate) models: [LinearModel; 3],
}

impl OneVsRestModel {
    pub fn from_models(models: [LinearModel; 3]) -> Self {
        OneVsRestModel { models }
    }

    pub fn fingerprint(&self) -> &str {
        self.models[0].fingerprint()
    }

    pub fn model_for(&self, kind: CrowdturfType) -> &LinearModel {
        &self.models[kind.index()]
    }

    pub fn scores(&self, x: &FeatureVector) -> Result<[f64; 3]> {
        Ok([
            self.models[0].score(x)?,
            self.models[1].score(x)?,
            self.models[2].score(x)?,
        ])
    }

    /// Argmax of the per-type scores; ties fall to the earlier class in
    /// (SocialMedia, SearchEngine, UserTraffic) order.
    pub fn classify_type(&self, x: &FeatureVector) -> Result<CrowdturfType> {
        let scores = self.scores(x)?;
        let mut best = 0usize;
        for (i, s) in scores.iter().enumerate().skip(1) {
            if *s > scores[best] {
                best = i;
            }
        }
        Ok(CrowdturfType::ALL[best])
    }
}

fn common_fingerprint(vectors: &[FeatureVector]) -> Result<String> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::precondition("no training vectors"))?;
    for v in vectors {
        if v.fingerprint != first.fingerprint {
            return Err(Error::FingerprintMismatch {
                expected: first.fingerprint.clone(),
                found: v.fingerprint.clone(),
            });
        }
    }
    Ok(first.fingerprint.clone())
}

fn check_shapes(vectors: &[FeatureVector]) -> Result<(usize, usize)> {
    let dense_dim = vectors[0].dense.len();
    let mut sparse_dim = 0usize;
    for v in vectors {
        if v.dense.len() != dense_dim {
            return Err(Error::precondition("inconsistent dense block widths"));
        }
        for &(i, x) in &v.sparse {
            if !x.is_finite() {
                return Err(Error::NonFiniteFeature { index: i as usize });
            }
            sparse_dim = sparse_dim.max(i as usize + 1);
        }
        for (j, x) in v.dense.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFiniteFeature { index: j });
            }
        }
    }
    Ok((sparse_dim, dense_dim))
}

/// Train the stage-1 detector by minimizing L2-regularized hinge loss with
/// `lambda = 1/(C*n)`, using deterministic epoch-ordered subgradient descent
/// at learning rate `1/(lambda*t)`. Deterministic given the seed.
pub fn train_svm(
    vectors: &[FeatureVector],
    labels: &[Label],
    config: &TrainConfig,
) -> Result<LinearModel> {
    config.validate()?;
    if vectors.len() != labels.len() || vectors.len() < 2 {
        return Err(Error::precondition(format!(
            "need matching vectors ({}) and labels ({}), at least 2",
            vectors.len(),
            labels.len()
        )));
    }
    let positives = labels
        .iter()
        .filter(|l| **l == config.positive_class)
        .count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::SingleClass);
    }
    let y: Vec<f64> = labels
        .iter()
        .map(|l| {
            if *l == config.positive_class {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    svm::train_binary(vectors, &y, config)
}

/// Train the stage-2 one-vs-rest model: one binary classifier per type, all
/// sharing one vocabulary fingerprint. Every type must have at least one
/// training example.
pub fn train_ovr(
    vectors: &[FeatureVector],
    types: &[CrowdturfType],
    config: &TrainConfig,
) -> Result<OneVsRestModel> {
    config.validate()?;
    if vectors.len() != types.len() || vectors.is_empty() {
        return Err(Error::precondition(format!(
            "need matching vectors ({}) and types ({})",
            vectors.len(),
            types.len()
        )));
    }
    for kind in CrowdturfType::ALL {
        if !types.contains(&kind) {
            return Err(Error::TypeAbsent(kind));
        }
    }
    let mut trained = Vec::with_capacity(3);
    for kind in CrowdturfType::ALL {
        let y: Vec<f64> = types
            .iter()
            .map(|t| if *t == kind { 1.0 } else { -1.0 })
            .collect();
        trained.push(svm::train_binary(vectors, &y, config)?);
    }
    let [a, b, c]: [LinearModel; 3] = trained.try_into().expect("three models");
    Ok(OneVsRestModel::from_models([a, b, c]))
}

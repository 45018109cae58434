//! Multinomial Naive Bayes over the sparse term-count block; the dense
//! metadata block is ignored.

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::FeatureVector;

use super::common_fingerprint;

/// Multinomial Naive Bayes baseline with additive smoothing.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    pub(crate) fingerprint: String,
    pub(crate) alpha: f64,
    pub(crate) sparse_dim: usize,
    /// Log-priors in (Legitimate, Crowdturfing) order.
    pub(crate) log_prior: [f64; 2],
    /// Per-class conditional log-probabilities over the vocabulary.
    pub(crate) cond_log_prob: [Vec<f64>; 2],
}

impl NaiveBayesModel {
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn log_prior(&self, class: Label) -> f64 {
        self.log_prior[class_index(class)]
    }

    pub fn cond_log_prob(&self, class: Label) -> &[f64] {
        &self.cond_log_prob[class_index(class)]
    }

    /// Unnormalized log-posteriors in (Legitimate, Crowdturfing) order.
    pub fn log_posterior(&self, x: &FeatureVector) -> Result<[f64; 2]> {
        if x.fingerprint != self.fingerprint {
            return Err(Error::FingerprintMismatch {
                expected: self.fingerprint.clone(),
                found: x.fingerprint.clone(),
            });
        }
        let mut post = self.log_prior;
        for &(i, count) in &x.sparse {
            let i = i as usize;
            if i >= self.sparse_dim {
                return Err(Error::precondition(format!(
                    "sparse index {i} out of range for model with {} terms",
                    self.sparse_dim
                )));
            }
            for (k, p) in post.iter_mut().enumerate() {
                *p += count * self.cond_log_prob[k][i];
            }
        }
        Ok(post)
    }

    /// Maximum-posterior label; an exact tie falls to Legitimate.
    pub fn predict(&self, x: &FeatureVector) -> Result<Label> {
        let post = self.log_posterior(x)?;
        Ok(if post[1] > post[0] {
            Label::Crowdturfing
        } else {
            Label::Legitimate
        })
    }
}

fn class_index(class: Label) -> usize {
    match class {
        Label::Legitimate => 0,
        Label::Crowdturfing => 1,
    }
}

/// Train the multinomial Naive Bayes baseline.
///
/// The sparse block is interpreted as raw term counts (see
/// [`crate::features::vectorize_counts`]); conditionals get additive
/// smoothing `alpha`.
pub fn train_nb(
    vectors: &[FeatureVector],
    labels: &[Label],
    alpha: f64,
) -> Result<NaiveBayesModel> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::precondition("alpha must be positive"));
    }
    if vectors.len() != labels.len() || vectors.is_empty() {
        return Err(Error::precondition(format!(
            "need matching vectors ({}) and labels ({})",
            vectors.len(),
            labels.len()
        )));
    }
    let fingerprint = common_fingerprint(vectors)?;
    let n_pos = labels.iter().filter(|l| **l == Label::Crowdturfing).count();
    if n_pos == 0 || n_pos == labels.len() {
        return Err(Error::SingleClass);
    }
    let sparse_dim = vectors
        .iter()
        .flat_map(|v| v.sparse.iter().map(|&(i, _)| i as usize + 1))
        .max()
        .ok_or(Error::EmptyVocabulary)?;

    let mut term_counts = [vec![0.0f64; sparse_dim], vec![0.0f64; sparse_dim]];
    let mut class_counts = [0usize; 2];
    for (v, l) in vectors.iter().zip(labels) {
        let k = class_index(*l);
        class_counts[k] += 1;
        for &(i, count) in &v.sparse {
            if !count.is_finite() || count < 0.0 {
                return Err(Error::NonFiniteFeature { index: i as usize });
            }
            term_counts[k][i as usize] += count;
        }
    }

    let n = vectors.len() as f64;
    let log_prior = [
        (class_counts[0] as f64 / n).ln(),
        (class_counts[1] as f64 / n).ln(),
    ];
    let cond_log_prob = term_counts.map(|counts| {
        let total: f64 = counts.iter().sum();
        let denom = total + alpha * sparse_dim as f64;
        counts
            .into_iter()
            .map(|c| ((c + alpha) / denom).ln())
            .collect::<Vec<f64>>()
    });

    Ok(NaiveBayesModel {
        fingerprint,
        alpha,
        sparse_dim,
        log_prior,
        cond_log_prob,
    })
}

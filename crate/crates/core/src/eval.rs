//! Evaluation: the confusion matrix and derived metrics, stratified k-fold
//! assignment, and the leakage-free cross-validation driver.

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label};
use crate::error::{Error, Result};
use crate::features::{build_vocabulary, vectorize_corpus, FeatureSpec};
use crate::model::{train_svm, TrainConfig};

/// Binary confusion matrix. Cell names follow the crowdturfing orientation:
/// `a` true crowdturfing predicted crowdturfing, `b` crowdturfing predicted
/// legitimate (misses), `c` legitimate predicted crowdturfing (false alarms),
/// `d` legitimate predicted legitimate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ConfusionMatrix {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        ConfusionMatrix { a, b, c, d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        self.a += other.a;
        self.b += other.b;
        self.c += other.c;
        self.d += other.d;
    }
}

/// Count prediction outcomes against ground truth.
pub fn confusion(predicted: &[Label], truth: &[Label]) -> Result<ConfusionMatrix> {
    if predicted.is_empty() || predicted.len() != truth.len() {
        return Err(Error::precondition(format!(
            "need matching non-empty predictions ({}) and truth ({})",
            predicted.len(),
            truth.len()
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (p, t) in predicted.iter().zip(truth) {
        match (t, p) {
            (Label::Crowdturfing, Label::Crowdturfing) => cm.a += 1,
            (Label::Crowdturfing, Label::Legitimate) => cm.b += 1,
            (Label::Legitimate, Label::Crowdturfing) => cm.c += 1,
            (Label::Legitimate, Label::Legitimate) => cm.d += 1,
        }
    }
    Ok(cm)
}

/// All derived scores. Ratios with a zero denominator are defined as 0 and
/// their names recorded in `degenerate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision_crowd: f64,
    pub recall_crowd: f64,
    pub f1_crowd: f64,
    pub precision_legit: f64,
    pub recall_legit: f64,
    pub f1_legit: f64,
    /// Class-size-weighted mean of the two F1 scores. With rare positives
    /// this diverges a lot from the crowdturfing-class F1, so both are
    /// reported.
    pub weighted_f1: f64,
    pub accuracy: f64,
    pub fpr: f64,
    pub fnr: f64,
    pub degenerate: Vec<String>,
}

/// Compute all metrics from a confusion matrix.
pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    if cm.total() == 0 {
        return Err(Error::precondition("empty confusion matrix"));
    }
    let mut degenerate = Vec::new();
    fn ratio(num: u64, den: u64, name: &str, degenerate: &mut Vec<String>) -> f64 {
        if den == 0 {
            degenerate.push(name.to_owned());
            0.0
        } else {
            num as f64 / den as f64
        }
    }
    fn f1(p: f64, r: f64, name: &str, degenerate: &mut Vec<String>) -> f64 {
        if p + r == 0.0 {
            degenerate.push(name.to_owned());
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
    let precision_crowd = ratio(cm.a, cm.a + cm.c, "precision_crowd", &mut degenerate);
    let recall_crowd = ratio(cm.a, cm.a + cm.b, "recall_crowd", &mut degenerate);
    let precision_legit = ratio(cm.d, cm.b + cm.d, "precision_legit", &mut degenerate);
    let recall_legit = ratio(cm.d, cm.c + cm.d, "recall_legit", &mut degenerate);
    let fpr = ratio(cm.c, cm.c + cm.d, "fpr", &mut degenerate);
    // complement of recall, so FNR = 1 - recall_crowd holds bit-exactly
    let fnr = if cm.a + cm.b == 0 {
        degenerate.push("fnr".to_owned());
        0.0
    } else {
        1.0 - recall_crowd
    };
    let f1_crowd = f1(precision_crowd, recall_crowd, "f1_crowd", &mut degenerate);
    let f1_legit = f1(precision_legit, recall_legit, "f1_legit", &mut degenerate);
    let n_crowd = cm.a + cm.b;
    let n_legit = cm.c + cm.d;
    let weighted_f1 = (n_crowd as f64 * f1_crowd + n_legit as f64 * f1_legit) / cm.total() as f64;
    let accuracy = (cm.a + cm.d) as f64 / cm.total() as f64;
    Ok(Metrics {
        precision_crowd,
        recall_crowd,
        f1_crowd,
        precision_legit,
        recall_legit,
        f1_legit,
        weighted_f1,
        accuracy,
        fpr,
        fnr,
        degenerate,
    })
}

/// Stratified fold assignment: one fold index per item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub assignment: Vec<u32>,
    pub k: u32,
    pub seed: u64,
    /// Classes with fewer members than folds (some folds will lack them).
    pub underfilled: Vec<Label>,
}

impl FoldAssignment {
    pub fn fold_indices(&self, fold: u32) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, f)| **f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn train_indices(&self, fold: u32) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, f)| **f != fold)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Seeded stratified assignment: shuffle within each class, then deal items
/// round-robin with a fold cursor that carries across classes, so fold sizes
/// differ by at most one overall and per class.
pub fn stratified_folds(labels: &[Label], k: u32, seed: u64) -> Result<FoldAssignment> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    if k < 2 {
        return Err(Error::precondition("k must be at least 2"));
    }
    if k as usize > labels.len() {
        return Err(Error::precondition(format!(
            "k = {k} exceeds the {} labeled items",
            labels.len()
        )));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0u32; labels.len()];
    let mut underfilled = Vec::new();
    let mut cursor = 0u32;
    for class in [Label::Legitimate, Label::Crowdturfing] {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == class)
            .map(|(i, _)| i)
            .collect();
        if !members.is_empty() && members.len() < k as usize {
            underfilled.push(class);
        }
        members.shuffle(&mut rng);
        for idx in members {
            assignment[idx] = cursor;
            cursor = (cursor + 1) % k;
        }
    }
    Ok(FoldAssignment {
        assignment,
        k,
        seed,
        underfilled,
    })
}

/// Per-fold evaluation results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: u32,
    /// Fingerprint of the vocabulary built from this fold's training split.
    pub vocab_fingerprint: String,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
}

/// Full cross-validation report. Pooled metrics come from the cell-wise sum
/// of the fold matrices (the headline numbers); macro metrics are the plain
/// mean of the per-fold metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVReport {
    pub k: u32,
    pub seed: u64,
    pub spec_hash: String,
    pub train_config: TrainConfig,
    pub folds: Vec<FoldReport>,
    pub pooled_confusion: ConfusionMatrix,
    pub pooled_metrics: Metrics,
    pub macro_metrics: Metrics,
}

impl CVReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable summary table (Accuracy, F1, FPR, FNR).
    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        out.push_str("         Accuracy      F1     FPR     FNR\n");
        let row = |name: &str, m: &Metrics| {
            format!(
                "{name:<8} {:>8.4} {:>7.3} {:>7.3} {:>7.3}\n",
                m.accuracy, m.weighted_f1, m.fpr, m.fnr
            )
        };
        out.push_str(&row("pooled", &self.pooled_metrics));
        out.push_str(&row("macro", &self.macro_metrics));
        out.push_str(&format!(
            "F1 above is the class-weighted average; crowdturfing-class F1 (pooled) = {:.3}\n",
            self.pooled_metrics.f1_crowd
        ));
        out
    }
}

fn mean_metrics(folds: &[FoldReport]) -> Metrics {
    let n = folds.len() as f64;
    let mut degenerate: Vec<String> = folds
        .iter()
        .flat_map(|f| f.metrics.degenerate.iter().cloned())
        .collect();
    degenerate.sort();
    degenerate.dedup();
    let avg = |get: fn(&Metrics) -> f64| folds.iter().map(|f| get(&f.metrics)).sum::<f64>() / n;
    Metrics {
        precision_crowd: avg(|m| m.precision_crowd),
        recall_crowd: avg(|m| m.recall_crowd),
        f1_crowd: avg(|m| m.f1_crowd),
        precision_legit: avg(|m| m.precision_legit),
        recall_legit: avg(|m| m.recall_legit),
        f1_legit: avg(|m| m.f1_legit),
        weighted_f1: avg(|m| m.weighted_f1),
        accuracy: avg(|m| m.accuracy),
        fpr: avg(|m| m.fpr),
        fnr: avg(|m| m.fnr),
        degenerate,
    }
}

/// Leakage-free stratified k-fold cross-validation of the stage-1 detector.
///
/// Each fold rebuilds the vocabulary (and the standardization statistics,
/// inside training) from its own training split only.
pub fn cross_validate(
    corpus: &Corpus,
    spec: &FeatureSpec,
    config: &TrainConfig,
    k: u32,
    seed: u64,
) -> Result<CVReport> {
    let labels: Vec<Label> = corpus
        .gigs
        .iter()
        .map(|g| {
            corpus
                .label_of(g.gig_id)
                .map(|l| l.label)
                .ok_or(Error::UnlabeledGig(g.gig_id))
        })
        .collect::<Result<_>>()?;
    let folds = stratified_folds(&labels, k, seed)?;

    let mut fold_reports = Vec::with_capacity(k as usize);
    let mut pooled = ConfusionMatrix::default();
    for fold in 0..k {
        let train_idx = folds.train_indices(fold);
        let test_idx = folds.fold_indices(fold);
        let train_corpus = corpus.subset(&train_idx);
        let test_corpus = corpus.subset(&test_idx);

        let run = || -> Result<FoldReport> {
            let vocab = build_vocabulary(&train_corpus, spec)?;
            let train_vectors = vectorize_corpus(&train_corpus, &vocab, spec)?;
            let train_labels: Vec<Label> = train_idx.iter().map(|&i| labels[i]).collect();
            let model = train_svm(&train_vectors, &train_labels, config)?;

            let test_vectors = vectorize_corpus(&test_corpus, &vocab, spec)?;
            let predicted: Vec<Label> = test_vectors
                .iter()
                .map(|v| model.classify(v))
                .collect::<Result<_>>()?;
            let truth: Vec<Label> = test_idx.iter().map(|&i| labels[i]).collect();
            let cm = confusion(&predicted, &truth)?;
            Ok(FoldReport {
                fold,
                vocab_fingerprint: vocab.fingerprint().to_owned(),
                confusion: cm,
                metrics: metrics(&cm)?,
            })
        };
        let report = run().map_err(|e| e.in_fold(fold as usize))?;
        pooled.add(&report.confusion);
        fold_reports.push(report);
    }

    debug_assert_eq!(
        pooled.total() as usize,
        corpus.gigs.len(),
        "pooled matrix must cover every gig exactly once"
    );
    let pooled_metrics = metrics(&pooled)?;
    let macro_metrics = mean_metrics(&fold_reports);
    Ok(CVReport {
        k,
        seed,
        spec_hash: spec.hash(),
        train_config: config.clone(),
        folds: fold_reports,
        pooled_confusion: pooled,
        pooled_metrics,
        macro_metrics,
    })
}

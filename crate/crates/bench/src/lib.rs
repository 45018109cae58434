//! Shared fixtures for the pipeline benchmarks.

use cgd_core::corpus::{Corpus, Label};
use cgd_core::features::{build_vocabulary, vectorize_corpus, FeatureSpec, FeatureVector};
use cgd_core::synthgen::{generate, SynthConfig};

/// A mid-sized labeled corpus with the default planted signal.
pub fn bench_corpus(n_gigs: u32) -> Corpus {
    generate(&SynthConfig {
        n_gigs,
        ..SynthConfig::default()
    })
    .expect("synthetic corpus generates")
}

/// Corpus plus ready-made vectors and labels for training benchmarks.
pub fn prepared(n_gigs: u32) -> (Corpus, Vec<FeatureVector>, Vec<Label>) {
    let corpus = bench_corpus(n_gigs);
    let spec = FeatureSpec::default();
    let vocab = build_vocabulary(&corpus, &spec).expect("vocabulary builds");
    let vectors = vectorize_corpus(&corpus, &vocab, &spec).expect("vectorizes");
    let labels = corpus
        .gigs
        .iter()
        .map(|g| corpus.label_of(g.gig_id).expect("labeled").label)
        .collect();
    (corpus, vectors, labels)
}

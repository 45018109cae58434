//! Acceptance suite: every release gate in one place, each test printing a
//! single pass/fail line. Run with `cargo test -p cgd-core --test acceptance`
//! (add `-- --nocapture` to see the lines for passing gates too).

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cgd_core::analytics::{extract_pagerank, extract_visitors, market_estimate};
use cgd_core::corpus::{estimate_coverage, Corpus, CrowdturfType, GigListing, Label, TopCategory};
use cgd_core::error::Result;
use cgd_core::eval::{cross_validate, metrics, stratified_folds, ConfusionMatrix};
use cgd_core::features::{
    build_vocabulary, chi_square_rank, vectorize_corpus, FeatureSpec, FeatureVector,
};
use cgd_core::model::{
    save_model, svm_gradient, svm_objective, train_ovr, train_svm, Model, TrainConfig,
};
use cgd_core::synthgen::{generate, SynthConfig};

fn pass(criterion: &str) {
    println!("[acceptance] {criterion}: PASS");
}

#[test]
fn c1_metric_reconstruction() {
    let cm = ConfusionMatrix::new(91, 30, 11, 1418);
    let start = Instant::now();
    let m = metrics(&cm).expect("metrics");
    let elapsed = start.elapsed();

    assert!(
        (m.accuracy - 0.9735).abs() <= 0.0005,
        "accuracy {}",
        m.accuracy
    );
    assert!((m.fpr - 0.008).abs() <= 0.001, "fpr {}", m.fpr);
    assert!((m.fnr - 0.248).abs() <= 0.003, "fnr {}", m.fnr);
    assert!(
        (m.weighted_f1 - 0.974).abs() <= 0.005,
        "weighted f1 {}",
        m.weighted_f1
    );
    // the crowdturfing-class F1 is reported separately and is a different number
    assert!(
        (m.f1_crowd - 0.8161).abs() <= 0.001,
        "crowd f1 {}",
        m.f1_crowd
    );
    assert!(m.f1_crowd < m.weighted_f1);
    assert!(elapsed.as_micros() < 1000, "metrics took {elapsed:?}");
    pass("C1 metric-reconstruction");
}

#[test]
fn c2_coverage_estimator() {
    let coverage = estimate_coverage(1000, 615, 517).expect("coverage");
    assert_eq!(coverage, 517.0 / 615.0);
    assert_eq!(format!("{coverage:.4}"), "0.8407");
    assert_eq!((coverage * 100.0).round() as u32, 84);
    pass("C2 coverage-estimator");
}

fn market_gig(id: u64, seller: &str, sold: u64) -> GigListing {
    GigListing {
        gig_id: id,
        title: format!("I will sell thing {id} for $5"),
        description: String::new(),
        top_category: TopCategory::OnlineMarketing,
        sub_category: "seo".to_owned(),
        rating_percent: 100,
        vote_count: 0,
        gig_longevity_days: 10,
        sold_count: sold,
        base_price_usd: 5.0,
        seller_id: seller.to_owned(),
        creation_year: 2013,
        buyers: None,
    }
}

#[test]
fn c3_market_estimate() {
    // crorkservice sells 601,210; the rest bring the total to 4,335,253
    let gigs = vec![
        market_gig(1, "crorkservice", 300_000),
        market_gig(2, "crorkservice", 301_210),
        market_gig(3, "dino_stark", 283_420),
        market_gig(4, "others", 3_450_623),
    ];
    let (corpus, _) = Corpus::build(gigs, vec![], false).expect("build");
    let estimate = market_estimate(&corpus, 10);
    assert_eq!(estimate.total_sold, 4_335_253);
    assert_eq!(estimate.min_revenue_usd, 21_676_265.0);
    let top = &estimate.top_sellers[0];
    assert_eq!(top.seller_id, "others");
    let crork = estimate
        .top_sellers
        .iter()
        .find(|s| s.seller_id == "crorkservice")
        .expect("crorkservice ranked");
    assert_eq!(crork.sold_count, 601_210);
    assert_eq!(crork.min_earned_usd, 3_006_050.0);
    pass("C3 market-estimate");
}

#[test]
fn c4_extraction_fixtures() {
    assert_eq!(
        extract_pagerank(
            "I will build a Linkwheel manually from 12 PR9 Web20 + 500 Wiki Backlinks+Premium Index for $5"
        ),
        Some(9)
    );
    assert_eq!(
        extract_pagerank(
            "I will give you a PR5 EDUCATION Nice permanent link on the homepage for $5"
        ),
        Some(5)
    );
    assert_eq!(
        extract_visitors("I will send 7000+ Adsense Safe Visitors To Your Website/Blog for $5")
            .map(|(n, _)| n),
        Some(7000)
    );
    assert_eq!(
        extract_visitors("I will send 15000 real human visitors to your website for $5")
            .map(|(n, _)| n),
        Some(15000)
    );
    assert_eq!(
        extract_visitors("I will send 5,000 USA only traffic to your website/blog for $5")
            .map(|(n, _)| n),
        Some(5000)
    );
    assert_eq!(extract_pagerank("I will color your logo"), None);
    assert_eq!(extract_visitors("I will color your logo"), None);
    pass("C4 extraction-fixtures");
}

#[test]
fn c5_end_to_end_synthetic_cv() {
    let start = Instant::now();
    let corpus = generate(&SynthConfig::default()).expect("generate");
    let report = cross_validate(
        &corpus,
        &FeatureSpec::default(),
        &TrainConfig::default(),
        10,
        42,
    )
    .expect("cross-validate");
    let elapsed = start.elapsed();

    let m = &report.pooled_metrics;
    assert!(m.accuracy >= 0.95, "pooled accuracy {}", m.accuracy);
    assert!(m.fpr <= 0.02, "pooled fpr {}", m.fpr);
    assert!(m.fnr <= 0.30, "pooled fnr {}", m.fnr);
    assert!(elapsed.as_secs() <= 60, "cv took {elapsed:?}");
    pass("C5 end-to-end-synthetic-cv");
}

#[test]
fn c6_two_stage_proportions() {
    let train = generate(&SynthConfig::default()).expect("train corpus");
    let spec = FeatureSpec::default();
    let config = TrainConfig::default();
    let vocab = build_vocabulary(&train, &spec).expect("vocab");
    let vectors = vectorize_corpus(&train, &vocab, &spec).expect("vectors");
    let labels: Vec<Label> = train
        .gigs
        .iter()
        .map(|g| train.label_of(g.gig_id).unwrap().label)
        .collect();
    let stage1 = train_svm(&vectors, &labels, &config).expect("stage 1");

    let crowd_idx: Vec<usize> = (0..train.gigs.len())
        .filter(|&i| labels[i] == Label::Crowdturfing)
        .collect();
    let crowd_vectors: Vec<FeatureVector> = crowd_idx.iter().map(|&i| vectors[i].clone()).collect();
    let crowd_types: Vec<CrowdturfType> = crowd_idx
        .iter()
        .map(|&i| train.label_of(train.gigs[i].gig_id).unwrap().kind.unwrap())
        .collect();
    let stage2 = train_ovr(&crowd_vectors, &crowd_types, &config).expect("stage 2");

    // wild corpus planted with a heavily skewed type split
    let planted_mix = [70.7, 27.3, 2.0];
    let wild = generate(&SynthConfig {
        n_gigs: 3000,
        crowdturf_fraction: 0.5,
        type_weights: planted_mix,
        seed: 777,
        ..SynthConfig::default()
    })
    .expect("wild corpus");
    let wild_vectors = vectorize_corpus(&wild, &vocab, &spec).expect("wild vectors");

    let mut planted = [0usize; 3];
    let mut predicted = [0usize; 3];
    for (gig, v) in wild.gigs.iter().zip(&wild_vectors) {
        if let Some(kind) = wild.label_of(gig.gig_id).unwrap().kind {
            planted[kind.index()] += 1;
        }
        if stage1.classify(v).expect("classify") == Label::Crowdturfing {
            predicted[stage2.classify_type(v).expect("type").index()] += 1;
        }
    }
    let planted_total: usize = planted.iter().sum();
    let predicted_total: usize = predicted.iter().sum();
    assert!(predicted_total > 0, "stage 1 detected nothing");
    for i in 0..3 {
        let planted_share = planted[i] as f64 / planted_total as f64;
        let predicted_share = predicted[i] as f64 / predicted_total as f64;
        assert!(
            (predicted_share - planted_share).abs() <= 0.03,
            "type {i}: predicted {predicted_share:.4} vs planted {planted_share:.4}"
        );
        // the realized plant itself stays near the configured mix
        let configured = planted_mix[i] / 100.0;
        assert!(
            (predicted_share - configured).abs() <= 0.03,
            "type {i}: predicted {predicted_share:.4} vs configured {configured:.4}"
        );
    }
    pass("C6 two-stage-proportions");
}

/// Independent chi-square route: observed-vs-expected cell sums.
fn chi2_oracle(presence: &[Vec<bool>], term: usize, labels: &[Label]) -> f64 {
    let n = labels.len() as f64;
    let mut obs = [[0.0f64; 2]; 2]; // [present][crowd]
    for (row, label) in presence.iter().zip(labels) {
        let p = usize::from(row[term]);
        let c = usize::from(*label == Label::Crowdturfing);
        obs[p][c] += 1.0;
    }
    let row_sum = [obs[0][0] + obs[0][1], obs[1][0] + obs[1][1]];
    let col_sum = [obs[0][0] + obs[1][0], obs[0][1] + obs[1][1]];
    if row_sum.contains(&0.0) || col_sum.contains(&0.0) {
        return 0.0;
    }
    let mut chi2 = 0.0;
    for p in 0..2 {
        for c in 0..2 {
            let expected = row_sum[p] * col_sum[c] / n;
            let d = obs[p][c] - expected;
            chi2 += d * d / expected;
        }
    }
    chi2
}

#[test]
fn c7_chi_square_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..50 {
        let n_docs = rng.random_range(4..=50usize);
        let n_terms = rng.random_range(1..=20usize);
        let mut presence = Vec::with_capacity(n_docs);
        let mut labels = Vec::with_capacity(n_docs);
        for i in 0..n_docs {
            presence.push(
                (0..n_terms)
                    .map(|_| rng.random_range(0..2) == 1)
                    .collect::<Vec<bool>>(),
            );
            // guarantee both classes
            labels.push(if i == 0 || (i > 1 && rng.random_range(0..2) == 1) {
                Label::Crowdturfing
            } else {
                Label::Legitimate
            });
        }
        let terms: Vec<String> = (0..n_terms).map(|j| format!("t{j:02}")).collect();
        let ranked = chi_square_rank(&presence, &terms, &labels).expect("rank");
        for score in &ranked {
            let j = terms.iter().position(|t| t == &score.term).unwrap();
            let expected = chi2_oracle(&presence, j, &labels);
            assert!(
                (score.chi2 - expected).abs() <= 1e-9,
                "case {case} term {}: {} vs oracle {expected}",
                score.term,
                score.chi2
            );
        }
    }

    // hand example: 100 docs, 50 positive, term in 30 positives and 0 negatives
    let mut presence = Vec::new();
    let mut labels = Vec::new();
    for i in 0..100 {
        presence.push(vec![i < 30]);
        labels.push(if i < 50 {
            Label::Crowdturfing
        } else {
            Label::Legitimate
        });
    }
    let ranked = chi_square_rank(&presence, &["term".to_owned()], &labels).expect("rank");
    assert!(
        (ranked[0].chi2 - 42.857).abs() <= 0.001,
        "chi2 {}",
        ranked[0].chi2
    );
    pass("C7 chi-square-oracle");
}

#[test]
fn c8_svm_numerics() {
    // gradient vs central differences on a fixed 30x10 problem
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let (n, dim) = (30, 10);
    let xs: Vec<FeatureVector> = (0..n)
        .map(|_| {
            FeatureVector::new(
                "fp",
                vec![],
                (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
            )
        })
        .collect();
    let ys: Vec<f64> = (0..n)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let lambda = 1.0 / n as f64;
    let h = 1e-6;
    for point in 0..20 {
        let w: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: f64 = rng.random_range(-1.0..1.0);
        let (grad, grad_b) = svm_gradient(&w, b, 0, &xs, &ys, lambda);
        for j in 0..dim {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[j] += h;
            wm[j] -= h;
            let fd = (svm_objective(&wp, b, 0, &xs, &ys, lambda)
                - svm_objective(&wm, b, 0, &xs, &ys, lambda))
                / (2.0 * h);
            let rel = (grad[j] - fd).abs() / grad[j].abs().max(fd.abs()).max(1e-8);
            assert!(rel <= 1e-4, "point {point} coord {j}: relative error {rel}");
        }
        let fd_b = (svm_objective(&w, b + h, 0, &xs, &ys, lambda)
            - svm_objective(&w, b - h, 0, &xs, &ys, lambda))
            / (2.0 * h);
        let rel = (grad_b - fd_b).abs() / grad_b.abs().max(fd_b.abs()).max(1e-8);
        assert!(rel <= 1e-4, "point {point} bias: relative error {rel}");
    }

    // separable toy set reaches 100% training accuracy
    let mut toy_rng = ChaCha8Rng::seed_from_u64(7);
    let mut xs = Vec::new();
    let mut labels = Vec::new();
    for i in 0..50 {
        let positive = i % 2 == 0;
        let center = if positive { 2.0 } else { -2.0 };
        xs.push(FeatureVector::new(
            "fp",
            vec![],
            (0..4)
                .map(|_| center + toy_rng.random_range(-0.5..0.5))
                .collect(),
        ));
        labels.push(if positive {
            Label::Crowdturfing
        } else {
            Label::Legitimate
        });
    }
    let model = train_svm(&xs, &labels, &TrainConfig::default()).expect("train");
    for (x, l) in xs.iter().zip(&labels) {
        assert_eq!(model.classify(x).expect("classify"), *l);
    }
    pass("C8 svm-numerics");
}

#[test]
fn c9_determinism_and_persistence() -> Result<()> {
    let config = SynthConfig {
        n_gigs: 100,
        crowdturf_fraction: 0.3,
        ..SynthConfig::default()
    };
    let corpus_a = generate(&config)?;
    let corpus_b = generate(&config)?;
    let spec = FeatureSpec::default();
    let train_config = TrainConfig::default();

    // byte-identical CV reports
    let report_a = cross_validate(&corpus_a, &spec, &train_config, 5, 9)?;
    let report_b = cross_validate(&corpus_b, &spec, &train_config, 5, 9)?;
    assert_eq!(report_a.to_json(), report_b.to_json());

    // byte-identical model files
    let vocab = build_vocabulary(&corpus_a, &spec)?;
    let vectors = vectorize_corpus(&corpus_a, &vocab, &spec)?;
    let labels: Vec<Label> = corpus_a
        .gigs
        .iter()
        .map(|g| corpus_a.label_of(g.gig_id).unwrap().label)
        .collect();
    let model_a = Model::Linear(train_svm(&vectors, &labels, &train_config)?);
    let model_b = Model::Linear(train_svm(&vectors, &labels, &train_config)?);
    let dir = tempfile::tempdir()?;
    let path_a = dir.path().join("a.cgdm");
    let path_b = dir.path().join("b.cgdm");
    save_model(&model_a, &path_a)?;
    save_model(&model_b, &path_b)?;
    assert_eq!(std::fs::read(&path_a)?, std::fs::read(&path_b)?);

    // save -> load -> classify agrees on every vector of the 100-gig fixture
    let loaded = match cgd_core::model::load_model(&path_a)? {
        Model::Linear(m) => m,
        other => panic!("expected linear model, got {}", other.kind()),
    };
    let original = match model_a {
        Model::Linear(ref m) => m,
        _ => unreachable!(),
    };
    for v in &vectors {
        assert_eq!(loaded.classify(v)?, original.classify(v)?);
        assert_eq!(loaded.score(v)?, original.score(v)?);
    }
    pass("C9 determinism-and-persistence");
    Ok(())
}

#[test]
fn c10_stratification_and_leakage() -> Result<()> {
    // 1,550 labels with 121 positives, k = 10
    let labels: Vec<Label> = (0..1550)
        .map(|i| {
            if i < 121 {
                Label::Crowdturfing
            } else {
                Label::Legitimate
            }
        })
        .collect();
    let folds = stratified_folds(&labels, 10, 42)?;
    for fold in 0..10 {
        let members = folds.fold_indices(fold);
        assert_eq!(
            members.len(),
            155,
            "fold {fold} has {} items",
            members.len()
        );
        let positives = members
            .iter()
            .filter(|&&i| labels[i] == Label::Crowdturfing)
            .count();
        assert!(
            (12..=13).contains(&positives),
            "fold {fold} has {positives} positives"
        );
    }

    // leakage check: each fold's vocabulary is derivable from its training
    // split alone, and every term clears min_df within that split
    let corpus = generate(&SynthConfig {
        n_gigs: 300,
        crowdturf_fraction: 0.2,
        ..SynthConfig::default()
    })?;
    let spec = FeatureSpec {
        min_df: 2,
        ..FeatureSpec::default()
    };
    let (k, seed) = (5u32, 11u64);
    let report = cross_validate(&corpus, &spec, &TrainConfig::default(), k, seed)?;
    let corpus_labels: Vec<Label> = corpus
        .gigs
        .iter()
        .map(|g| corpus.label_of(g.gig_id).unwrap().label)
        .collect();
    let assignment = stratified_folds(&corpus_labels, k, seed)?;
    for fold_report in &report.folds {
        let train_corpus = corpus.subset(&assignment.train_indices(fold_report.fold));
        let rebuilt = build_vocabulary(&train_corpus, &spec)?;
        assert_eq!(
            rebuilt.fingerprint(),
            fold_report.vocab_fingerprint,
            "fold {} vocabulary was not built from its training split",
            fold_report.fold
        );
        for (idx, _term) in rebuilt.terms().iter().enumerate() {
            assert!(rebuilt.df(idx as u32) >= spec.min_df);
        }
    }
    pass("C10 stratification-and-leakage");
    Ok(())
}

//! Property tests for the library's cross-cutting invariants.

use std::collections::BTreeSet;

use proptest::prelude::*;

use cgd_core::analytics::empirical_cdf;
use cgd_core::corpus::{
    estimate_coverage, holdout_filter, BuyerDistribution, Corpus, GigListing, Label, SellerLevel,
    SellerProfile, TopCategory,
};
use cgd_core::features::{
    build_vocabulary, buyer_entropy, tokenize, vectorize, FeatureSpec, FeatureVector, TextFields,
};
use cgd_core::model::train_nb;
use cgd_core::stopwords;

fn token_strategy() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[a-z0-9]{1,8}").expect("valid regex")
}

fn gig(id: u64, seller: &str, title: &str) -> GigListing {
    GigListing {
        gig_id: id,
        title: title.to_owned(),
        description: String::new(),
        top_category: TopCategory::OnlineMarketing,
        sub_category: "seo".to_owned(),
        rating_percent: 90,
        vote_count: 1,
        gig_longevity_days: 5,
        sold_count: 0,
        base_price_usd: 5.0,
        seller_id: seller.to_owned(),
        creation_year: 2013,
        buyers: None,
    }
}

fn seller(id: &str) -> SellerProfile {
    SellerProfile {
        seller_id: id.to_owned(),
        username: id.to_owned(),
        country: "US".to_owned(),
        seller_level: SellerLevel::None,
        seller_longevity_days: 10,
        response_time_hours: 1.0,
    }
}

proptest! {
    #[test]
    fn tokenize_is_idempotent_through_join(text in ".{0,120}") {
        let stop = stopwords::english();
        let once = tokenize(&text, stop);
        let again = tokenize(&once.join(" "), stop);
        prop_assert_eq!(once, again);
    }

    #[test]
    fn sparse_block_is_l2_normalized(
        docs in proptest::collection::vec(
            proptest::collection::vec(token_strategy(), 1..12),
            2..10
        )
    ) {
        let gigs: Vec<GigListing> = docs
            .iter()
            .enumerate()
            .map(|(i, tokens)| gig(i as u64 + 1, "s", &tokens.join(" ")))
            .collect();
        let (corpus, _) = Corpus::build(gigs, vec![seller("s")], true).expect("build");
        let spec = FeatureSpec {
            text_fields: TextFields::Title,
            stopword_list: "none".to_owned(),
            min_df: 1,
            ..FeatureSpec::default()
        };
        let vocab = build_vocabulary(&corpus, &spec).expect("vocab");
        for g in &corpus.gigs {
            let v = vectorize(g, &corpus.sellers["s"], &vocab, &spec).expect("vectorize");
            let norm = v.sparse_l2_norm();
            if v.sparse.is_empty() {
                prop_assert_eq!(norm, 0.0);
            } else {
                prop_assert!((norm - 1.0).abs() <= 1e-9, "norm {}", norm);
            }
            // vectorization is pure: a second run gives the identical vector
            let w = vectorize(g, &corpus.sellers["s"], &vocab, &spec).expect("vectorize");
            prop_assert_eq!(v, w);
        }
    }

    #[test]
    fn coverage_is_scale_invariant(
        overlap in 0u64..500,
        extra_active in 1u64..500,
        extra_sampled in 0u64..500,
        k in 1u64..40
    ) {
        let active = overlap + extra_active;
        let sampled = active + extra_sampled;
        let base = estimate_coverage(sampled, active, overlap).expect("coverage");
        let scaled = estimate_coverage(sampled * k, active * k, overlap * k).expect("coverage");
        prop_assert_eq!(base, scaled);
    }

    #[test]
    fn entropy_is_bounded_by_uniform(
        counts in proptest::collection::btree_map(
            proptest::string::string_regex("[A-Z]{2}").expect("valid regex"),
            1u64..100,
            1..12
        )
    ) {
        let dist = BuyerDistribution::new(counts.clone());
        let k = dist.distinct_countries() as f64;
        let h = buyer_entropy(&dist);
        prop_assert!(h <= k.log2() + 1e-9, "h = {h}, log2(k) = {}", k.log2());
        let uniform = counts.values().collect::<BTreeSet<_>>().len() == 1;
        if uniform {
            prop_assert!((h - k.log2()).abs() <= 1e-9);
        } else {
            prop_assert!(h < k.log2());
        }
    }

    #[test]
    fn cdf_is_monotone_and_ends_at_one(values in proptest::collection::vec(1u64..10_000, 1..60)) {
        let points = empirical_cdf(&values).expect("cdf");
        for pair in points.windows(2) {
            prop_assert!(pair[0].x < pair[1].x);
            prop_assert!(pair[0].fraction <= pair[1].fraction);
        }
        prop_assert_eq!(points.last().unwrap().fraction, 1.0);
    }

    #[test]
    fn holdout_output_shares_no_seller_with_labeled_set(
        seller_of_gig in proptest::collection::vec(0usize..6, 4..30),
        labeled_picks in proptest::collection::vec(proptest::bool::ANY, 4..30)
    ) {
        let sellers: Vec<SellerProfile> = (0..6).map(|i| seller(&format!("s{i}"))).collect();
        let gigs: Vec<GigListing> = seller_of_gig
            .iter()
            .enumerate()
            .map(|(i, s)| gig(i as u64 + 1, &format!("s{s}"), "a title"))
            .collect();
        let n = gigs.len();
        let (corpus, _) = Corpus::build(gigs, sellers, true).expect("build");
        let labeled: BTreeSet<u64> = labeled_picks
            .iter()
            .take(n)
            .enumerate()
            .filter(|(_, keep)| **keep)
            .map(|(i, _)| i as u64 + 1)
            .collect();
        let labeled_sellers: BTreeSet<&str> = corpus
            .gigs
            .iter()
            .filter(|g| labeled.contains(&g.gig_id))
            .map(|g| g.seller_id.as_str())
            .collect();
        let filtered = holdout_filter(&corpus, &labeled).expect("filter");
        for g in &filtered.gigs {
            prop_assert!(!labeled_sellers.contains(g.seller_id.as_str()));
            prop_assert!(!labeled.contains(&g.gig_id));
        }
    }

    #[test]
    fn nb_ordering_survives_scaling_with_balanced_priors(
        scale in 1u32..20,
        query in proptest::collection::vec((0u32..4, 1u32..8), 1..5)
    ) {
        let counts = |pairs: &[(u32, f64)]| FeatureVector::new("fp", pairs.to_vec(), vec![]);
        let xs = vec![
            counts(&[(0, 3.0), (2, 1.0)]),
            counts(&[(0, 1.0), (3, 2.0)]),
            counts(&[(1, 2.0), (2, 1.0)]),
            counts(&[(1, 1.0), (3, 1.0)]),
        ];
        let labels = vec![
            Label::Crowdturfing,
            Label::Crowdturfing,
            Label::Legitimate,
            Label::Legitimate,
        ];
        let model = train_nb(&xs, &labels, 1.0).expect("train");
        let mut base: Vec<(u32, f64)> = query.iter().map(|&(i, c)| (i, c as f64)).collect();
        base.sort_by_key(|&(i, _)| i);
        base.dedup_by_key(|&mut (i, _)| i);
        let scaled: Vec<(u32, f64)> = base.iter().map(|&(i, c)| (i, c * scale as f64)).collect();
        prop_assert_eq!(
            model.predict(&counts(&base)).expect("predict"),
            model.predict(&counts(&scaled)).expect("predict")
        );
    }
}

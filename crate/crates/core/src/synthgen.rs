//! Deterministic synthetic labeled-corpus generator.
//!
//! The generator plants tunable signal — per-type title vocabularies plus a
//! buyer-distribution shift for crowdturfing gigs — so the full pipeline is
//! testable without the real marketplace data. Generation uses ChaCha8, a
//! fixed documented algorithm, never the platform default RNG, so a given
//! seed produces byte-identical corpora everywhere.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    BuyerDistribution, Corpus, CrowdturfType, GigLabel, GigListing, Label, SellerLevel,
    SellerProfile, TopCategory,
};
use crate::error::{Error, Result};

const COUNTRIES: &[&str] = &[
    "US", "GB", "CA", "AU", "IN", "PK", "BD", "ID", "LK", "PH", "DE", "FR", "ES", "IT", "NL", "BR",
    "MX", "RU", "UA", "PL", "RO", "MD", "TR", "EG", "NG", "ZA", "KE", "JP", "KR", "CN", "TH", "VN",
    "MY", "SG", "NZ", "IE", "SE", "NO", "DK", "GR",
];

const SOCIAL_TOKENS: &[&str] = &[
    "likes",
    "followers",
    "twitter",
    "facebook",
    "fans",
    "youtube",
    "views",
    "subscribers",
    "instagram",
    "retweets",
];
const SEARCH_TOKENS: &[&str] = &[
    "backlinks",
    "link",
    "rank",
    "seo",
    "bookmark",
    "linkwheel",
    "wiki",
    "pr9",
    "index",
    "edu",
];
const TRAFFIC_TOKENS: &[&str] = &["traffic", "visitors", "adsense", "hits", "clicks", "unique"];
const LEGIT_TOKENS: &[&str] = &[
    "logo",
    "design",
    "sing",
    "song",
    "video",
    "article",
    "write",
    "drawing",
    "cartoon",
    "portrait",
    "voice",
    "translate",
    "birthday",
    "whiteboard",
    "testimonial",
    "intro",
    "photo",
    "resume",
    "poem",
    "banner",
];
const NOISE_TOKENS: &[&str] = &[
    "real",
    "best",
    "quality",
    "fast",
    "professional",
    "amazing",
    "delivery",
    "day",
    "hours",
    "service",
    "top",
    "custom",
    "super",
    "guaranteed",
    "awesome",
    "instantly",
    "perfect",
    "huge",
    "bonus",
    "24",
];

const CROWD_SUBCATS: &[&str] = &["social marketing", "seo services", "web traffic"];
const LEGIT_SUBCATS: &[&str] = &[
    "logo design",
    "illustration",
    "jingles",
    "articles",
    "intros",
    "fun stuff",
    "tips",
    "translation",
    "diet",
    "animation",
];

/// Generator configuration. The defaults mirror the labeled-data shape the
/// pipeline is designed for: 6% crowdturfing prevalence with a 65:47:9
/// social/search/traffic mix.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_gigs: u32,
    pub crowdturf_fraction: f64,
    /// Social, search, traffic weights.
    pub type_weights: [f64; 3],
    pub social_tokens: Vec<String>,
    pub search_tokens: Vec<String>,
    pub traffic_tokens: Vec<String>,
    pub legit_tokens: Vec<String>,
    pub noise_tokens: Vec<String>,
    /// Probability that a title/description token is drawn from the noise
    /// pool instead of the class pool.
    pub noise_rate: f64,
    /// Draw crowdturfing buyer distributions over more countries (higher
    /// world-domination rate and entropy).
    pub metadata_shift: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let own = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        SynthConfig {
            n_gigs: 2000,
            crowdturf_fraction: 0.06,
            type_weights: [65.0, 47.0, 9.0],
            social_tokens: own(SOCIAL_TOKENS),
            search_tokens: own(SEARCH_TOKENS),
            traffic_tokens: own(TRAFFIC_TOKENS),
            legit_tokens: own(LEGIT_TOKENS),
            noise_tokens: own(NOISE_TOKENS),
            noise_rate: 0.2,
            metadata_shift: true,
            seed: 42,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.n_gigs == 0 {
            return Err(Error::precondition("n_gigs must be at least 1"));
        }
        if !(self.crowdturf_fraction > 0.0 && self.crowdturf_fraction < 1.0) {
            return Err(Error::precondition("crowdturf_fraction must lie in (0, 1)"));
        }
        if self.type_weights.iter().any(|w| *w < 0.0)
            || self.type_weights.iter().sum::<f64>() == 0.0
        {
            return Err(Error::precondition(
                "type weights must be non-negative and not all zero",
            ));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(Error::precondition("noise_rate must lie in [0, 1]"));
        }
        for (name, pool) in [
            ("social", &self.social_tokens),
            ("search", &self.search_tokens),
            ("traffic", &self.traffic_tokens),
            ("legit", &self.legit_tokens),
            ("noise", &self.noise_tokens),
        ] {
            if pool.is_empty() {
                return Err(Error::precondition(format!("{name} token pool is empty")));
            }
        }
        Ok(())
    }

    fn pool_for(&self, kind: CrowdturfType) -> &[String] {
        match kind {
            CrowdturfType::SocialMedia => &self.social_tokens,
            CrowdturfType::SearchEngine => &self.search_tokens,
            CrowdturfType::UserTraffic => &self.traffic_tokens,
        }
    }
}

/// Number of crowdturfing gigs for a given size and fraction (round to
/// nearest, half away from zero).
pub fn crowd_count(n_gigs: u32, fraction: f64) -> usize {
    (n_gigs as f64 * fraction).round() as usize
}

fn sample_weighted(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut draw = rng.random_range(0.0..total);
    for (i, w) in weights.iter().enumerate() {
        if draw < *w {
            return i;
        }
        draw -= w;
    }
    weights.len() - 1
}

fn sample_tokens(
    rng: &mut ChaCha8Rng,
    class_pool: &[String],
    noise_pool: &[String],
    noise_rate: f64,
    count: usize,
) -> Vec<String> {
    (0..count)
        .map(|_| {
            let pool = if rng.random_range(0.0..1.0) < noise_rate {
                noise_pool
            } else {
                class_pool
            };
            pool[rng.random_range(0..pool.len())].clone()
        })
        .collect()
}

fn sample_buyers(rng: &mut ChaCha8Rng, spread: bool) -> BuyerDistribution {
    let n_countries = if spread {
        rng.random_range(8..=20usize)
    } else {
        rng.random_range(1..=4usize)
    };
    let mut picks: Vec<usize> = (0..COUNTRIES.len()).collect();
    picks.shuffle(rng);
    picks.truncate(n_countries);
    picks.sort_unstable();
    BuyerDistribution::new(
        picks
            .into_iter()
            .map(|i| (COUNTRIES[i].to_owned(), rng.random_range(1..=50u64))),
    )
}

/// Generate a fully labeled synthetic corpus. Deterministic given the seed.
pub fn generate(config: &SynthConfig) -> Result<Corpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n_gigs as usize;
    let n_crowd = crowd_count(config.n_gigs, config.crowdturf_fraction).min(n);

    let mut is_crowd = vec![false; n];
    for flag in is_crowd.iter_mut().take(n_crowd) {
        *flag = true;
    }
    is_crowd.shuffle(&mut rng);

    let n_sellers = (n / 3).max(1);
    let sellers: Vec<SellerProfile> = (0..n_sellers)
        .map(|i| {
            let level = match rng.random_range(0..4u32) {
                0 => SellerLevel::None,
                1 => SellerLevel::Level1,
                2 => SellerLevel::Level2,
                _ => SellerLevel::TopRated,
            };
            SellerProfile {
                seller_id: format!("s{:05}", i + 1),
                username: format!("seller{:05}", i + 1),
                country: COUNTRIES[rng.random_range(0..COUNTRIES.len())].to_owned(),
                seller_level: level,
                seller_longevity_days: rng.random_range(10..1500),
                response_time_hours: rng.random_range(1..96u32) as f64 / 2.0,
            }
        })
        .collect();

    let year_weights = [1.0, 2.0, 4.0, 8.0];
    let years = [2010, 2011, 2012, 2013];

    let mut gigs = Vec::with_capacity(n);
    let mut labels: BTreeMap<u64, GigLabel> = BTreeMap::new();
    for (i, &crowd) in is_crowd.iter().enumerate() {
        let gig_id = i as u64 + 1;
        let kind = if crowd {
            Some(CrowdturfType::ALL[sample_weighted(&mut rng, &config.type_weights)])
        } else {
            None
        };
        let class_pool: &[String] = match kind {
            Some(k) => config.pool_for(k),
            None => &config.legit_tokens,
        };

        let title_len = rng.random_range(4..=8usize);
        let title_tokens = sample_tokens(
            &mut rng,
            class_pool,
            &config.noise_tokens,
            config.noise_rate,
            title_len,
        );
        let title = format!("I will {} for $5", title_tokens.join(" "));
        let desc_len = rng.random_range(8..=16usize);
        let desc_tokens = sample_tokens(
            &mut rng,
            class_pool,
            &config.noise_tokens,
            config.noise_rate,
            desc_len,
        );
        let description = desc_tokens.join(" ");

        let top_category = if crowd && rng.random_range(0.0..1.0) < 0.85 {
            TopCategory::OnlineMarketing
        } else {
            TopCategory::ALL[rng.random_range(0..TopCategory::ALL.len())]
        };
        let sub_category = if crowd {
            CROWD_SUBCATS[rng.random_range(0..CROWD_SUBCATS.len())]
        } else {
            LEGIT_SUBCATS[rng.random_range(0..LEGIT_SUBCATS.len())]
        };

        let buyers = sample_buyers(&mut rng, crowd && config.metadata_shift);
        let sold_count = buyers.total();
        let year = years[sample_weighted(&mut rng, &year_weights)];

        gigs.push(GigListing {
            gig_id,
            title,
            description,
            top_category,
            sub_category: sub_category.to_owned(),
            rating_percent: rng.random_range(80..=100u32) as u8,
            vote_count: rng.random_range(0..500),
            gig_longevity_days: rng.random_range(1..1200),
            sold_count,
            base_price_usd: 5.0,
            seller_id: sellers[rng.random_range(0..n_sellers)].seller_id.clone(),
            creation_year: year,
            buyers: Some(buyers),
        });
        labels.insert(
            gig_id,
            GigLabel {
                label: if crowd {
                    Label::Crowdturfing
                } else {
                    Label::Legitimate
                },
                kind,
            },
        );
    }

    let (corpus, _) = Corpus::build(gigs, sellers, true)?;
    corpus.with_labels(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{save_corpus, save_labels};
    use crate::features::tokenize;
    use crate::stopwords::StopwordSet;

    fn count_crowd(corpus: &Corpus) -> usize {
        corpus
            .labels
            .as_ref()
            .unwrap()
            .values()
            .filter(|l| l.label == Label::Crowdturfing)
            .count()
    }

    #[test]
    fn default_config_plants_exactly_120_crowd_gigs() {
        let corpus = generate(&SynthConfig::default()).expect("generate");
        assert_eq!(corpus.gigs.len(), 2000);
        assert_eq!(count_crowd(&corpus), 120);
    }

    #[test]
    fn label_counts_follow_the_rounding_rule() {
        for (i, (n, fraction)) in [
            (100u32, 0.06f64),
            (101, 0.06),
            (250, 0.1),
            (33, 0.5),
            (75, 0.013),
            (400, 0.25),
            (12, 0.4),
            (999, 0.07),
            (2000, 0.06),
            (10, 0.15),
            (500, 0.031),
            (640, 0.2),
            (64, 0.09),
            (81, 0.11),
            (121, 0.061),
            (300, 0.017),
            (57, 0.33),
            (48, 0.76),
            (222, 0.505),
            (1000, 0.001),
        ]
        .into_iter()
        .enumerate()
        {
            let config = SynthConfig {
                n_gigs: n,
                crowdturf_fraction: fraction,
                seed: i as u64,
                ..SynthConfig::default()
            };
            let corpus = generate(&config).expect("generate");
            assert_eq!(
                count_crowd(&corpus),
                (n as f64 * fraction).round() as usize,
                "case n={n} fraction={fraction}"
            );
        }
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let config = SynthConfig {
            n_gigs: 150,
            ..SynthConfig::default()
        };
        let mut a = Vec::new();
        let mut al = Vec::new();
        let ca = generate(&config).expect("generate");
        save_corpus(&ca, &mut a).unwrap();
        save_labels(ca.labels.as_ref().unwrap(), &mut al).unwrap();

        let mut b = Vec::new();
        let mut bl = Vec::new();
        let cb = generate(&config).expect("generate");
        save_corpus(&cb, &mut b).unwrap();
        save_labels(cb.labels.as_ref().unwrap(), &mut bl).unwrap();

        assert_eq!(a, b);
        assert_eq!(al, bl);

        let other = generate(&SynthConfig { seed: 43, ..config }).expect("generate");
        let mut c = Vec::new();
        save_corpus(&other, &mut c).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_noise_plants_a_type_token_in_every_crowd_title() {
        let config = SynthConfig {
            n_gigs: 400,
            noise_rate: 0.0,
            ..SynthConfig::default()
        };
        let corpus = generate(&config).expect("generate");
        let none = StopwordSet::none();
        for gig in &corpus.gigs {
            let label = corpus.label_of(gig.gig_id).unwrap();
            if let Some(kind) = label.kind {
                let pool = config.pool_for(kind);
                let tokens = tokenize(&gig.title, &none);
                assert!(
                    tokens.iter().any(|t| pool.contains(t)),
                    "gig {} ({kind}): no planted token in {:?}",
                    gig.gig_id,
                    gig.title
                );
            }
        }
    }

    #[test]
    fn metadata_shift_is_detectable() {
        let corpus = generate(&SynthConfig::default()).expect("generate");
        let mut crowd = (0usize, 0.0f64);
        let mut legit = (0usize, 0.0f64);
        for gig in &corpus.gigs {
            let distinct = gig.buyers.as_ref().unwrap().distinct_countries() as f64;
            match corpus.label_of(gig.gig_id).unwrap().label {
                Label::Crowdturfing => {
                    crowd.0 += 1;
                    crowd.1 += distinct;
                }
                Label::Legitimate => {
                    legit.0 += 1;
                    legit.1 += distinct;
                }
            }
        }
        let crowd_mean = crowd.1 / crowd.0 as f64;
        let legit_mean = legit.1 / legit.0 as f64;
        assert!(
            crowd_mean > legit_mean,
            "crowd mean countries {crowd_mean} should exceed legit {legit_mean}"
        );
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = SynthConfig::default();
        assert!(generate(&SynthConfig {
            crowdturf_fraction: 0.0,
            ..base.clone()
        })
        .is_err());
        assert!(generate(&SynthConfig {
            crowdturf_fraction: 1.0,
            ..base.clone()
        })
        .is_err());
        assert!(generate(&SynthConfig {
            type_weights: [0.0, 0.0, 0.0],
            ..base.clone()
        })
        .is_err());
        assert!(generate(&SynthConfig {
            noise_rate: 1.5,
            ..base.clone()
        })
        .is_err());
        assert!(generate(&SynthConfig { n_gigs: 0, ..base }).is_err());
    }

    #[test]
    fn generated_corpus_is_valid() {
        let corpus = generate(&SynthConfig {
            n_gigs: 200,
            ..SynthConfig::default()
        })
        .expect("generate");
        let report = crate::corpus::validate_as_of(&corpus, 2026);
        assert!(report.is_clean(), "issues: {:?}", report.issues);
    }
}

//! Corpus characterization and case-study computations: word frequencies,
//! PageRank/visitor extraction from titles, target-site histograms,
//! market-size estimates, creation timelines, and empirical CDFs.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use regex::Regex;
use serde::Serialize;

use crate::corpus::{Corpus, GigListing};
use crate::error::{Error, Result};
use crate::features::tokenize;
use crate::stopwords::StopwordSet;

/// A term and how many times it occurs across titles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermFrequency {
    pub term: String,
    pub count: u64,
}

/// Unigram counts over titles, sorted by count descending then term ascending.
pub fn word_frequencies(titles: &[String], stopwords: &StopwordSet) -> Vec<TermFrequency> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for title in titles {
        for token in tokenize(title, stopwords) {
            *counts.entry(token).or_insert(0) += 1;
        }
    }
    let mut freqs: Vec<TermFrequency> = counts
        .into_iter()
        .map(|(term, count)| TermFrequency { term, count })
        .collect();
    freqs.sort_by(|x, y| y.count.cmp(&x.count).then_with(|| x.term.cmp(&y.term)));
    freqs
}

/// A PageRank score advertised in a gig title.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PageRankMention {
    pub gig_id: u64,
    pub pr_score: u8,
}

fn pagerank_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\bpr ?([1-9])\b").expect("valid regex"))
}

/// Extract an advertised PageRank score: case-insensitive `PR` (optionally
/// followed by a single space) and a digit 1-9, on word boundaries. Several
/// mentions yield the maximum; sellers advertise their best page.
pub fn extract_pagerank(title: &str) -> Option<u8> {
    pagerank_regex()
        .captures_iter(title)
        .map(|c| c[1].parse::<u8>().expect("single digit"))
        .max()
}

/// A promised-visitor count extracted from a gig title.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VisitorClaim {
    pub gig_id: u64,
    pub visitors: u64,
    /// Set when several candidate numbers competed (the largest wins).
    pub ambiguous: bool,
}

const TRAFFIC_KEYWORDS: [&str; 4] = ["visitor", "visitors", "traffic", "hits"];

/// Trim leading/trailing non-alphanumeric characters and lowercase.
fn normalize_token(token: &str) -> String {
    token
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

/// Parse a token as a claimed count: digits with optional thousands commas
/// and an optional trailing `+`.
fn parse_count(token: &str) -> Option<u64> {
    let token = token.strip_suffix('+').unwrap_or(token);
    if token.is_empty() || !token.bytes().next().is_some_and(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: String = token.chars().filter(|c| *c != ',').collect();
    if token.chars().any(|c| c != ',' && !c.is_ascii_digit()) {
        return None;
    }
    digits.parse::<u64>().ok().filter(|n| *n >= 1)
}

/// Extract a promised visitor count: a number within four whitespace tokens
/// of a traffic keyword. Commas are stripped and a trailing `+` is allowed;
/// several candidates yield the largest with the ambiguous flag set.
pub fn extract_visitors(title: &str) -> Option<(u64, bool)> {
    let raw: Vec<&str> = title.split_whitespace().collect();
    let normalized: Vec<String> = raw.iter().map(|t| normalize_token(t)).collect();
    let keyword_positions: Vec<usize> = normalized
        .iter()
        .enumerate()
        .filter(|(_, t)| TRAFFIC_KEYWORDS.contains(&t.as_str()))
        .map(|(i, _)| i)
        .collect();
    if keyword_positions.is_empty() {
        return None;
    }
    let mut candidates: Vec<u64> = Vec::new();
    for (i, token) in raw.iter().enumerate() {
        let near = keyword_positions.iter().any(|&k| i.abs_diff(k) <= 4);
        if !near {
            continue;
        }
        if let Some(n) = parse_count(token) {
            candidates.push(n);
        }
    }
    let best = candidates.iter().copied().max()?;
    Some((best, candidates.len() > 1))
}

/// PageRank mentions across a whole corpus.
pub fn pagerank_mentions(corpus: &Corpus) -> Vec<PageRankMention> {
    corpus
        .gigs
        .iter()
        .filter_map(|g| {
            extract_pagerank(&g.title).map(|pr_score| PageRankMention {
                gig_id: g.gig_id,
                pr_score,
            })
        })
        .collect()
}

/// Visitor claims across a whole corpus.
pub fn visitor_claims(corpus: &Corpus) -> Vec<VisitorClaim> {
    corpus
        .gigs
        .iter()
        .filter_map(|g| {
            extract_visitors(&g.title).map(|(visitors, ambiguous)| VisitorClaim {
                gig_id: g.gig_id,
                visitors,
                ambiguous,
            })
        })
        .collect()
}

/// One point of an empirical CDF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdfPoint {
    pub x: u64,
    pub fraction: f64,
}

/// Empirical CDF with one point per distinct value; the last fraction is 1.
pub fn empirical_cdf(values: &[u64]) -> Result<Vec<CdfPoint>> {
    if values.is_empty() {
        return Err(Error::precondition("cannot build a CDF from no values"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let mut points = Vec::new();
    let mut seen = 0usize;
    let mut i = 0usize;
    while i < sorted.len() {
        let x = sorted[i];
        while i < sorted.len() && sorted[i] == x {
            i += 1;
            seen += 1;
        }
        points.push(CdfPoint {
            x,
            fraction: seen as f64 / n,
        });
    }
    Ok(points)
}

/// Token-to-site lexicon used for the target-site histogram.
#[derive(Debug, Clone)]
pub struct SiteLexicon {
    pub version: String,
    pub token_to_site: BTreeMap<String, String>,
}

impl SiteLexicon {
    /// The shipped lexicon. `google+` cannot survive alphanumeric
    /// tokenization, so the bare `google` token maps to Google+ as well;
    /// the histogram is meant for social-media-targeting gig titles.
    pub fn builtin() -> Self {
        let entries = [
            ("facebook", "Facebook"),
            ("fb", "Facebook"),
            ("twitter", "Twitter"),
            ("youtube", "YouTube"),
            ("google", "Google+"),
            ("googleplus", "Google+"),
            ("instagram", "Instagram"),
            ("pinterest", "Pinterest"),
            ("soundcloud", "SoundCloud"),
            ("linkedin", "LinkedIn"),
        ];
        SiteLexicon {
            version: "sites-v1".to_owned(),
            token_to_site: entries
                .into_iter()
                .map(|(t, s)| (t.to_owned(), s.to_owned()))
                .collect(),
        }
    }

    /// Parse a lexicon from `token<TAB>site` lines.
    pub fn parse(version: impl Into<String>, text: &str) -> Result<Self> {
        let mut token_to_site = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (token, site) = line.split_once('\t').ok_or_else(|| {
                Error::precondition(format!("lexicon line {}: expected token<TAB>site", i + 1))
            })?;
            token_to_site.insert(token.trim().to_lowercase(), site.trim().to_owned());
        }
        if token_to_site.is_empty() {
            return Err(Error::precondition("empty site lexicon"));
        }
        Ok(SiteLexicon {
            version: version.into(),
            token_to_site,
        })
    }
}

/// Gig counts per targeted site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SiteHistogram {
    pub counts: BTreeMap<String, u64>,
    pub lexicon_version: String,
}

/// Count, per site, the gigs whose title mentions one of the site's lexicon
/// tokens. A gig targeting several sites counts once per site.
pub fn target_site_histogram(titles: &[String], lexicon: &SiteLexicon) -> SiteHistogram {
    let none = StopwordSet::none();
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for title in titles {
        let sites: BTreeSet<&str> = tokenize(title, &none)
            .into_iter()
            .filter_map(|t| lexicon.token_to_site.get(&t).map(String::as_str))
            .collect();
        for site in sites {
            *counts.entry(site.to_owned()).or_insert(0) += 1;
        }
    }
    SiteHistogram {
        counts,
        lexicon_version: lexicon.version.clone(),
    }
}

/// One seller's aggregate sales.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopSeller {
    pub seller_id: String,
    pub username: String,
    pub sold_count: u64,
    pub min_earned_usd: f64,
}

/// Marketplace size: total sales, floor revenue, and the top sellers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketEstimate {
    pub total_sold: u64,
    pub min_revenue_usd: f64,
    pub top_sellers: Vec<TopSeller>,
}

/// Total sold gigs, minimum revenue (sales times base price), and the
/// `top_k` sellers by sales.
pub fn market_estimate(corpus: &Corpus, top_k: usize) -> MarketEstimate {
    let mut total_sold = 0u64;
    let mut min_revenue_usd = 0.0f64;
    let mut per_seller: BTreeMap<&str, (u64, f64)> = BTreeMap::new();
    for gig in &corpus.gigs {
        total_sold += gig.sold_count;
        let earned = gig.sold_count as f64 * gig.base_price_usd;
        min_revenue_usd += earned;
        let entry = per_seller.entry(gig.seller_id.as_str()).or_insert((0, 0.0));
        entry.0 += gig.sold_count;
        entry.1 += earned;
    }
    let mut sellers: Vec<TopSeller> = per_seller
        .into_iter()
        .map(|(seller_id, (sold_count, min_earned_usd))| TopSeller {
            seller_id: seller_id.to_owned(),
            username: corpus
                .sellers
                .get(seller_id)
                .map(|s| s.username.clone())
                .unwrap_or_else(|| seller_id.to_owned()),
            sold_count,
            min_earned_usd,
        })
        .collect();
    sellers.sort_by(|x, y| {
        y.sold_count
            .cmp(&x.sold_count)
            .then_with(|| x.seller_id.cmp(&y.seller_id))
    });
    sellers.truncate(top_k);
    MarketEstimate {
        total_sold,
        min_revenue_usd,
        top_sellers: sellers,
    }
}

/// Cumulative created-gig counts per year, in year order.
pub fn creation_timeline(gigs: &[GigListing]) -> BTreeMap<i32, u64> {
    let mut per_year: BTreeMap<i32, u64> = BTreeMap::new();
    for gig in gigs {
        *per_year.entry(gig.creation_year).or_insert(0) += 1;
    }
    let mut cumulative = 0u64;
    per_year
        .into_iter()
        .map(|(year, count)| {
            cumulative += count;
            (year, cumulative)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stopwords;

    #[test]
    fn word_frequencies_count_and_sort() {
        let titles = vec!["twitter followers".to_owned(), "twitter likes".to_owned()];
        let freqs = word_frequencies(&titles, &StopwordSet::none());
        assert_eq!(freqs[0].term, "twitter");
        assert_eq!(freqs[0].count, 2);
        assert_eq!(freqs[1].term, "followers");
        assert_eq!(freqs[2].term, "likes");
        assert!(word_frequencies(&[], stopwords::english()).is_empty());
    }

    #[test]
    fn pagerank_extraction_on_marketplace_titles() {
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
        assert_eq!(extract_pagerank("I will color your logo"), None);
    }

    #[test]
    fn pagerank_edge_cases() {
        assert_eq!(extract_pagerank("pr 3 links"), Some(3));
        assert_eq!(extract_pagerank("PR1 and PR7 and pr4"), Some(7));
        assert_eq!(extract_pagerank("PR0 PR10 SPR5 PRX"), None);
        assert_eq!(extract_pagerank("improve your PageRank"), None);
    }

    #[test]
    fn visitor_extraction_on_marketplace_titles() {
        assert_eq!(
            extract_visitors("I will send 7000+ Adsense Safe Visitors To Your Website/Blog for $5"),
            Some((7000, false))
        );
        assert_eq!(
            extract_visitors("I will send 15000 real human visitors to your website for $5"),
            Some((15000, false))
        );
        assert_eq!(
            extract_visitors("I will send 5,000 USA only traffic to your website/blog for $5"),
            Some((5000, false))
        );
    }

    #[test]
    fn visitor_extraction_window_and_ambiguity() {
        // no traffic keyword
        assert_eq!(
            extract_visitors("I will provide 2000+ twitter followers in 24 hours for $5"),
            None
        );
        // number too far from the keyword
        assert_eq!(
            extract_visitors("I will send 9000 of something a b c d e real traffic now"),
            None
        );
        // two candidates: largest wins, flagged
        assert_eq!(
            extract_visitors("I will send 500 to 2,000 visitors for $5"),
            Some((2000, true))
        );
        // the $5 token is not a count
        assert_eq!(extract_visitors("I will send traffic for $5"), None);
    }

    #[test]
    fn cdf_examples() {
        let points = empirical_cdf(&[1, 2, 3, 4]).unwrap();
        assert_eq!(
            points[1],
            CdfPoint {
                x: 2,
                fraction: 0.5
            }
        );
        assert_eq!(points.last().unwrap().fraction, 1.0);

        let same = empirical_cdf(&[7, 7, 7]).unwrap();
        assert_eq!(
            same,
            vec![CdfPoint {
                x: 7,
                fraction: 1.0
            }]
        );

        let visitors = empirical_cdf(&[5000, 8000, 12000, 20000]).unwrap();
        let at_10k = visitors
            .iter()
            .filter(|p| p.x <= 10_000)
            .map(|p| p.fraction)
            .next_back()
            .unwrap();
        assert_eq!(at_10k, 0.5);

        assert!(empirical_cdf(&[]).is_err());
    }

    #[test]
    fn cdf_is_monotone() {
        let points = empirical_cdf(&[9, 3, 3, 7, 1, 9, 9]).unwrap();
        for w in points.windows(2) {
            assert!(w[0].x < w[1].x);
            assert!(w[0].fraction <= w[1].fraction);
        }
        assert_eq!(points.last().unwrap().fraction, 1.0);
    }

    #[test]
    fn site_histogram_on_marketplace_titles() {
        let lexicon = SiteLexicon::builtin();
        let one = |title: &str| target_site_histogram(&[title.to_owned()], &lexicon).counts;
        let twitter = one(
            "I will provide 2000+ perfect looking twitter followers without password in 24 hours for $5",
        );
        assert_eq!(twitter.get("Twitter"), Some(&1));
        assert_eq!(twitter.len(), 1);

        let fb =
            one("I will deliver 100+ real fb likes from france to you facebook fanpage for $5");
        assert_eq!(fb.get("Facebook"), Some(&1));
        assert_eq!(fb.len(), 1);

        let none = one("I will create 1000 BACKLINKS guaranteed + bonus for $5");
        assert!(none.is_empty());
    }

    #[test]
    fn multi_site_gig_counts_once_per_site() {
        let lexicon = SiteLexicon::builtin();
        let h = target_site_histogram(
            &["I will promote on twitter facebook and youtube twitter".to_owned()],
            &lexicon,
        );
        assert_eq!(h.counts.get("Twitter"), Some(&1));
        assert_eq!(h.counts.get("Facebook"), Some(&1));
        assert_eq!(h.counts.get("YouTube"), Some(&1));
    }

    #[test]
    fn timeline_is_cumulative() {
        use crate::corpus::tests_support::gig_with_year;
        let gigs = vec![
            gig_with_year(1, 2010),
            gig_with_year(2, 2011),
            gig_with_year(3, 2011),
        ];
        let timeline = creation_timeline(&gigs);
        assert_eq!(timeline.get(&2010), Some(&1));
        assert_eq!(timeline.get(&2011), Some(&3));
        assert!(creation_timeline(&[]).is_empty());
    }
}
